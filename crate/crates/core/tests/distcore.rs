use preauction_core::dist::{full_posterior, monopoly_price, r_star, truncate, virtual_value};
use preauction_core::iron::iron;
use preauction_core::numeric::{find_root, integrate, linspace};
use preauction_core::{Distribution, NumericConfig, ValueDistribution};
use proptest::prelude::*;

fn example() -> Distribution {
    Distribution::uniform(0.5, 2.0).unwrap()
}

/// Density bump in the middle: the raw virtual value drops at 1.2.
fn irregular() -> Distribution {
    Distribution::piecewise_linear(vec![(0.0, 0.0), (1.0, 0.1), (1.2, 0.9), (2.0, 1.0)]).unwrap()
}

fn grid_argmax<D: ValueDistribution>(d: &D, n: usize) -> (f64, f64) {
    linspace(d.lo(), d.hi(), n)
        .into_iter()
        .map(|p| (p, p * (1.0 - d.cdf(p))))
        .fold((f64::NAN, f64::NEG_INFINITY), |best, x| if x.1 > best.1 { x } else { best })
}

#[test]
fn virtual_value_examples() {
    assert!((virtual_value(&example(), 1.5).unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(virtual_value(&example(), 2.0).unwrap(), 2.0);
    let unit = Distribution::uniform(0.0, 1.0).unwrap();
    assert!((virtual_value(&unit, 0.25).unwrap() + 0.5).abs() < 1e-12);
    assert!(virtual_value(&unit, 1.5).is_err());
}

#[test]
fn monopoly_price_examples() {
    let cfg = NumericConfig::default();
    let m = monopoly_price(&example(), &cfg);
    let (p, _) = grid_argmax(&example(), 4096);
    assert!((m.price - 1.0).abs() < 1e-9);
    assert!((m.price - p).abs() < 1.5 / 4095.0);

    let unit = Distribution::uniform(0.0, 1.0).unwrap();
    let m = monopoly_price(&unit, &cfg);
    assert!((m.price - 0.5).abs() < 1e-9 && (m.revenue - 0.25).abs() < 1e-12);

    let top = truncate(&example(), 1.5, 2.0).unwrap();
    assert_eq!(monopoly_price(&top, &cfg).price, 1.5);
}

#[test]
fn monopoly_price_beats_every_grid_price_on_irregular_prior() {
    let f = irregular();
    let m = monopoly_price(&f, &NumericConfig::default());
    let (_, best) = grid_argmax(&f, 4096);
    assert!(m.revenue >= best - 1e-12);
}

#[test]
fn r_star_examples() {
    let cfg = NumericConfig::default();
    assert!((r_star(&example(), 1.0, &cfg).unwrap() - 1.5).abs() < 1e-9);
    let unit = Distribution::uniform(0.0, 1.0).unwrap();
    assert!((r_star(&unit, 0.5, &cfg).unwrap() - 0.75).abs() < 1e-9);
    assert!((r_star(&example(), 1e-9, &cfg).unwrap() - 1.0).abs() < 1e-8);
    assert!(r_star(&irregular(), 0.5, &cfg).is_err());
}

#[test]
fn truncation_examples() {
    let f = example();
    let full = truncate(&f, 0.5, 2.0).unwrap();
    for v in linspace(0.5, 2.0, 31) {
        assert!((full.cdf(v) - f.cdf(v)).abs() < 1e-15);
    }
    let top = truncate(&f, 1.5, 2.0).unwrap();
    assert!((top.cdf(1.75) - 0.5).abs() < 1e-12);
    let low = truncate(&f, 0.5, 1.5).unwrap();
    assert!((virtual_value(&low, 1.0).unwrap() - 0.5).abs() < 1e-12);
    assert!(truncate(&f, 1.0, 1.0).is_err());
}

/// Upper concave envelope of `(xs, ys)` at every node, by checking every
/// chord that spans it.
fn brute_hull(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|k| {
            let mut best = ys[k];
            for i in 0..k {
                for j in k + 1..n {
                    let t = (xs[k] - xs[i]) / (xs[j] - xs[i]);
                    best = best.max(ys[i] + t * (ys[j] - ys[i]));
                }
            }
            best
        })
        .collect()
}

#[test]
fn ironing_matches_concave_hull_oracle() {
    let cfg = NumericConfig { grid_points: 512, ..NumericConfig::default() };
    let p = full_posterior(&irregular());
    let iv = iron(&p, &cfg);
    assert!(iv.ironed());

    let n = 512;
    let qs: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    let vs: Vec<f64> = qs.iter().map(|&q| p.quantile(1.0 - q)).collect();
    let rs: Vec<f64> = qs.iter().zip(&vs).map(|(q, v)| q * v).collect();
    let hull = brute_hull(&qs, &rs);
    let mut worst: f64 = 0.0;
    for k in 0..n - 1 {
        let slope = (hull[k + 1] - hull[k]) / (qs[k + 1] - qs[k]);
        let mid = 0.5 * (vs[k] + vs[k + 1]);
        worst = worst.max((iv.eval(mid) - slope).abs());
    }
    assert!(worst < 1e-8, "max deviation from hull slopes {worst}");
}

#[test]
fn quadrature_and_roots() {
    assert!((integrate(|_| 1.0, 0.0, 1.0) - 1.0).abs() < 1e-12);
    assert!((integrate(|v| v, 0.0, 1.0) - 0.5).abs() < 1e-12);
    let r = find_root(|v| v * v - 2.0, 1.0, 2.0, 1e-12).unwrap();
    assert!((r - std::f64::consts::SQRT_2).abs() < 1e-11);
    assert!(find_root(|v| v * v + 1.0, 1.0, 2.0, 1e-12).is_err());
}

/// Piecewise-linear CDFs with 2 to 6 pieces on `[lo, lo + width]`.
fn piecewise() -> impl Strategy<Value = Distribution> {
    (0.0..2.0f64, 0.5..3.0f64, prop::collection::vec((0.05..1.0f64, 0.05..1.0f64), 2..=6)).prop_map(|(lo, width, steps)| {
        let (sx, sc): (f64, f64) = steps.iter().fold((0.0, 0.0), |a, s| (a.0 + s.0, a.1 + s.1));
        let mut knots = vec![(lo, 0.0)];
        let (mut x, mut c) = (0.0, 0.0);
        for (i, (dx, dc)) in steps.iter().enumerate() {
            x += dx;
            c += dc;
            let last = i + 1 == steps.len();
            knots.push((if last { lo + width } else { lo + width * x / sx }, if last { 1.0 } else { c / sc }));
        }
        Distribution::piecewise_linear(knots).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_inverts_quantile(f in piecewise()) {
        for q in linspace(0.0, 1.0, 256) {
            prop_assert!((f.cdf(f.quantile(q)) - q).abs() < 1e-8);
        }
    }

    #[test]
    fn truncating_below_keeps_virtual_values(f in piecewise(), a in 0.0..0.9f64) {
        let cut = f.lo() + a * (f.hi() - f.lo());
        let top = truncate(&f, cut, f.hi()).unwrap();
        for v in linspace(cut, f.hi(), 40) {
            let x = virtual_value(&top, v).unwrap();
            let y = virtual_value(&f, v).unwrap();
            prop_assert!((x - y).abs() < 1e-8 * (1.0 + y.abs()), "v = {v}: {x} vs {y}");
        }
    }

    #[test]
    fn ironing_is_monotone_and_area_preserving(f in piecewise()) {
        let cfg = NumericConfig::default();
        let p = full_posterior(&f);
        let iv = iron(&p, &cfg);
        let vs = linspace(f.lo(), f.hi(), 400);
        for w in vs.windows(2) {
            prop_assert!(iv.eval(w[1]) >= iv.eval(w[0]) - 1e-9);
        }
        // On every flat stretch the ironed and raw virtual surplus agree.
        for s in iv.segments().iter().filter(|s| s.is_flat() && s.hi - s.lo > 1e-6) {
            let mut breaks = f.breakpoints();
            breaks.retain(|&b| b > s.lo && b < s.hi);
            let mut pts = vec![s.lo];
            pts.extend(breaks);
            pts.push(s.hi);
            let diff: f64 = pts
                .windows(2)
                .map(|w| integrate(|v| (iv.eval(v) - p.virtual_value(v).unwrap()) * p.pdf(v), w[0], w[1]))
                .sum();
            prop_assert!(diff.abs() < 1e-6, "area drift {diff} on [{}, {}]", s.lo, s.hi);
        }
    }

    #[test]
    fn regular_priors_pass_through(lo in 0.0..2.0f64, width in 0.1..3.0f64) {
        let f = Distribution::uniform(lo, lo + width).unwrap();
        let iv = iron(&full_posterior(&f), &NumericConfig::default());
        prop_assert!(!iv.ironed());
        for v in linspace(f.lo(), f.hi(), 20) {
            prop_assert!((iv.eval(v) - virtual_value(&f, v).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn monopoly_revenue_dominates_grid(f in piecewise()) {
        let m = monopoly_price(&f, &NumericConfig::default());
        for p in linspace(f.lo(), f.hi(), 200) {
            prop_assert!(m.revenue >= p * (1.0 - f.cdf(p)) - 1e-12);
        }
    }
}
