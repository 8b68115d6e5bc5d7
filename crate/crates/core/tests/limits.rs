use std::f64::consts::PI;

use freestable::limits::{
    h_map, psi_closed, psi_from_s_transform, psi_stable, scale_law, stable_s_transform, LimitLaw,
};
use freestable::numerics::adaptive_simpson;
use freestable::transforms::StableLaw;

fn grid() -> impl Iterator<Item = f64> {
    (0..=200).map(|k| 10.0 * k as f64 / 200.0)
}

fn laws() -> Vec<LimitLaw> {
    let mut v: Vec<LimitLaw> = (0..=3).map(|l| LimitLaw::closed_form(l).unwrap()).collect();
    for alpha in [0.4, 2.0 / 3.0, 1.0, 1.5, 1.9] {
        v.push(LimitLaw::stable(alpha).unwrap());
    }
    v.push(LimitLaw::via_s_transform(stable_s_transform(1.2).unwrap()).unwrap());
    v.push(LimitLaw::stable(0.8).unwrap().scaled(2.5).unwrap());
    v
}

/// Integration tolerance per panel; the S-transform route differentiates
/// numerically and is only accurate to about `1e-10` relative.
fn panel_tol(law: &LimitLaw) -> f64 {
    if law.stable_index().is_some() {
        1e-12
    } else {
        1e-10
    }
}

/// Mass of `2 pi s f(s)` over `[0, r]` in panels of width at most `1/8`,
/// with a panel edge where the circular law jumps.
fn mass(law: &LimitLaw, r: f64) -> f64 {
    let f = |s: f64| 2.0 * PI * s * law.density(s).unwrap();
    let mut edges = vec![0.0];
    let panels = (8.0 * r).ceil() as usize;
    edges.extend((1..=panels).map(|k| r * k as f64 / panels as f64));
    if law.stable_index() == Some(2.0) && r > law.scale() {
        edges.push(law.scale());
        edges.sort_by(f64::total_cmp);
    }
    edges
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], panel_tol(law)))
        .sum()
}

#[test]
fn closed_forms_match_stable_solver() {
    for l in 0..=3 {
        let alpha = 2.0 / (l as f64 + 1.0);
        for r in grid() {
            let gap = (psi_stable(alpha, r).unwrap() - psi_closed(l, r).unwrap()).abs();
            assert!(gap < 1e-10, "l={l} r={r} gap={gap}");
        }
    }
}

#[test]
fn general_solver_matches_stable_solver() {
    for alpha in [0.5, 2.0 / 3.0, 1.0, 1.5] {
        let s = stable_s_transform(alpha).unwrap();
        for r in (1..=40).map(|k| k as f64 / 4.0) {
            let general = psi_from_s_transform(&*s, r).unwrap();
            let direct = psi_stable(alpha, r).unwrap();
            assert!((general - direct).abs() < 1e-9, "alpha={alpha} r={r}");
        }
    }
}

#[test]
fn radial_cdf_is_integrated_density() {
    for law in laws() {
        for r in [0.05, 0.3, 0.9, 1.0, 1.7, 4.0, 10.0] {
            let gap = (mass(&law, r) - law.psi(r).unwrap()).abs();
            assert!(gap < 1e-8, "{law:?} r={r} gap={gap}");
            assert_eq!(law.radial_cdf(r).unwrap(), law.psi(r).unwrap());
        }
    }
}

#[test]
fn total_mass_is_one() {
    for law in laws() {
        // r = e^s turns the heavy radial tail into an exponential one
        let f = |s: f64| {
            let r = s.exp();
            2.0 * PI * r * r * law.density(r).unwrap()
        };
        let total: f64 = (-30..60)
            .map(|k| adaptive_simpson(f, k as f64, (k + 1) as f64, panel_tol(&law)))
            .sum();
        assert!((total - 1.0).abs() < 1e-6, "{law:?} total={total}");
    }
}

#[test]
fn stable_psi_is_a_strictly_increasing_bijection() {
    for alpha in [0.3, 0.8, 1.0, 1.6, 1.95] {
        let mut prev = psi_stable(alpha, 0.0).unwrap();
        assert_eq!(prev, 0.0);
        for k in 1..=400 {
            let r = k as f64 / 40.0;
            let psi = psi_stable(alpha, r).unwrap();
            // 1 - psi decays like r^{-2 alpha/(2 - alpha)} and leaves f64 range
            if prev < 1.0 - 1e-12 {
                assert!(psi > prev, "alpha={alpha} r={r}");
            } else {
                assert!(psi >= prev, "alpha={alpha} r={r}");
            }
            if r <= 1.0 {
                assert!(psi < 1.0, "alpha={alpha} r={r}");
            }
            prev = psi;
        }
    }
}

#[test]
fn dilation_commutes_with_h() {
    for alpha in [0.7, 1.0, 1.8] {
        let base = StableLaw::symmetric(alpha).unwrap();
        for c in [0.5, 1.0, 3.0] {
            let after = scale_law(&h_map(&base).unwrap(), c).unwrap();
            let before = h_map(&base.scaled(c)).unwrap();
            for r in [0.1, 1.0, 2.5, 7.0] {
                let direct = h_map(&base).unwrap().psi(r / c).unwrap();
                assert!((after.psi(r).unwrap() - direct).abs() < 1e-14);
                assert!((before.psi(r).unwrap() - direct).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn oplus_of_copies_is_a_dilation() {
    for alpha in [0.5, 1.0, 2.0] {
        let law = LimitLaw::stable(alpha).unwrap();
        let mut acc = law.clone();
        for m in 2..=4u32 {
            acc = acc.oplus(&law).unwrap();
            let want = (m as f64).powf(1.0 / alpha);
            assert!((acc.scale() - want).abs() < 1e-12 * want);
        }
    }
    let mixed = LimitLaw::stable(1.0).unwrap().oplus(&LimitLaw::stable(0.5).unwrap());
    assert!(mixed.is_err());
    let general = LimitLaw::via_s_transform(stable_s_transform(1.0).unwrap()).unwrap();
    assert!(general.oplus(&general).is_err());
}
