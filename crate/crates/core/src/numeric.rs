//! Quadrature, root finding and scalar maximization shared by every module.

use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Resolution knobs for every numerical routine in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NumericConfig {
    /// Gauss-Legendre nodes per axis for tensor-product cross-check quadrature.
    pub quad_points: usize,
    /// Absolute tolerance of bracketed root finding and scalar maximization.
    pub root_tol: f64,
    /// Points in reserve-price, monopoly-price and ironing grids.
    pub grid_points: usize,
    /// Points in the threshold scans that locate constraint sign changes.
    pub scan_points: usize,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig { quad_points: 512, root_tol: 1e-9, grid_points: 2048, scan_points: 256 }
    }
}

impl NumericConfig {
    pub fn validate(&self) -> Result<()> {
        if self.quad_points < 64 {
            return Err(Error::param("quad_points", "must be at least 64"));
        }
        if !(self.root_tol > 0.0 && self.root_tol <= 1e-3) {
            return Err(Error::param("root_tol", "must lie in (0, 1e-3]"));
        }
        if self.grid_points < 128 {
            return Err(Error::param("grid_points", "must be at least 128"));
        }
        if self.scan_points < 16 {
            return Err(Error::param("scan_points", "must be at least 16"));
        }
        Ok(())
    }

    /// The same configuration with every resolution doubled.
    pub fn doubled(&self) -> Self {
        NumericConfig {
            quad_points: self.quad_points * 2,
            root_tol: self.root_tol / 2.0,
            grid_points: self.grid_points * 2,
            scan_points: self.scan_points * 2,
        }
    }
}

/// Relative tolerance of [`integrate`].
pub const QUAD_REL_TOL: f64 = 1e-9;
const QUAD_ABS_TOL: f64 = 1e-14;
const QUAD_MAX_INTERVALS: usize = 4096;

// Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        // Odd Kronrod indices are the Gauss-7 nodes.
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod quadrature of `f` over `[a, b]` to relative
/// tolerance [`QUAD_REL_TOL`].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    if a > b {
        return -integrate(f, b, a);
    }
    let (first, first_err) = gk15(&f, a, b);
    let mut parts: Vec<(f64, f64, f64, f64)> = alloc::vec![(a, b, first, first_err)];
    loop {
        let total: f64 = parts.iter().map(|p| p.2).sum();
        let err: f64 = parts.iter().map(|p| p.3).sum();
        if err <= (QUAD_REL_TOL * total.abs()).max(QUAD_ABS_TOL) || parts.len() >= QUAD_MAX_INTERVALS {
            return total;
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (lo, hi, _, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // Interval below floating-point resolution; accept it.
            parts.push((lo, hi, gk15(&f, lo, hi).0, 0.0));
            continue;
        }
        let (left, left_err) = gk15(&f, lo, mid);
        let (right, right_err) = gk15(&f, mid, hi);
        parts.push((lo, mid, left, left_err));
        parts.push((mid, hi, right, right_err));
    }
}

/// [`integrate`] over `[a, b]` split at every interior point of `breaks`.
///
/// Integrands in this crate are piecewise smooth with kinks at known
/// locations (support endpoints, reserves, distribution knots).
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64]) -> f64 {
    if !(b > a) {
        return if a == b { 0.0 } else { -integrate_with_breaks(f, b, a, breaks) };
    }
    let mut points: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    points.push(a);
    points.push(b);
    points.sort_by(f64::total_cmp);
    points.dedup();
    points.windows(2).map(|w| integrate(&f, w[0], w[1])).sum()
}

/// Brent's method for a root of `f` in `[a, b]`; `f(a)` and `f(b)` must not
/// share a sign. The returned point is within `tol` of a sign change.
pub fn find_root<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || (fa > 0.0) == (fb > 0.0) {
        return Err(Error::NoSignChange { lo: a, hi: b, f_lo: fa, f_hi: fb });
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..200 {
        if (fb > 0.0) == (fc > 0.0) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
    }
    Ok(b)
}

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`.
/// Returns `(argmax, max)`; endpoints are candidates too.
pub fn maximize<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while hi - lo > tol {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 >= f2 { (x1, f1) } else { (x2, f2) };
    for x in [a, b] {
        let fx = f(x);
        // Left endpoint wins ties so flat curves resolve to the smallest argument.
        if fx > best.1 || (fx == best.1 && x < best.0) {
            best = (x, fx);
        }
    }
    best
}

/// Fixed 8-point Gauss-Legendre on each panel of `[a, b]` split at `breaks`.
/// Exact for integrands that are polynomials of degree at most 15 on every
/// panel, which covers everything built from piecewise linear CDFs.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64]) -> f64 {
    const X: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329_0, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
    const W: [f64; 4] = [0.362_683_783_378_362_0, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];
    if !(b > a) {
        return 0.0;
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.push(a);
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    for w in pts.windows(2) {
        let (c, h) = (0.5 * (w[0] + w[1]), 0.5 * (w[1] - w[0]));
        for (x, wt) in X.iter().zip(&W) {
            total += wt * h * (f(c - h * x) + f(c + h * x));
        }
    }
    total
}

/// `n` evenly spaced points from `a` to `b` inclusive.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => {
            let step = (b - a) / (n - 1) as f64;
            let mut out: Vec<f64> = (0..n).map(|i| a + step * i as f64).collect();
            out[n - 1] = b;
            out
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = libm::cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_constants_and_lines() {
        assert!((integrate(|_| 1.0, 0.0, 1.0) - 1.0).abs() < 1e-14);
        assert!((integrate(|v| v, 0.0, 1.0) - 0.5).abs() < 1e-14);
        assert_eq!(integrate(|v| v, 0.3, 0.3), 0.0);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let exact = 0.5 * 0.3 * 0.3 + 0.5 * 0.7 * 0.7;
        let got = integrate(|v: f64| (v - 0.3).abs(), 0.0, 1.0);
        assert!((got - exact).abs() < 1e-9, "{got}");
        let split = integrate_with_breaks(|v: f64| (v - 0.3).abs(), 0.0, 1.0, &[0.3, 7.0]);
        assert!((split - exact).abs() < 1e-15);
    }

    #[test]
    fn smooth_integrand_to_relative_tolerance() {
        let got = integrate(libm::exp, 0.0, 2.0);
        let exact = libm::exp(2.0) - 1.0;
        assert!(((got - exact) / exact).abs() < 1e-9);
    }

    #[test]
    fn root_of_quadratic_is_sqrt_two() {
        let r = find_root(|v| v * v - 2.0, 1.0, 2.0, 1e-12).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn root_requires_sign_change() {
        let err = find_root(|v| v * v + 1.0, -1.0, 1.0, 1e-9).unwrap_err();
        assert!(matches!(err, Error::NoSignChange { .. }));
    }

    #[test]
    fn golden_section_prefers_left_on_flat() {
        let (x, fx) = maximize(|_| 1.0, 0.0, 1.0, 1e-9);
        assert_eq!(x, 0.0);
        assert_eq!(fx, 1.0);
        let (x, _) = maximize(|v| -(v - 0.25) * (v - 0.25), 0.0, 1.0, 1e-10);
        assert!((x - 0.25).abs() < 1e-8);
    }

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(64);
        let sum_w: f64 = w.iter().sum();
        assert!((sum_w - 2.0).abs() < 1e-13);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((m - 2.0 / 11.0).abs() < 1e-13);
    }

    #[test]
    fn config_bounds() {
        assert!(NumericConfig::default().validate().is_ok());
        let bad = NumericConfig { quad_points: 8, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = NumericConfig { root_tol: 0.1, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = NumericConfig { grid_points: 64, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
