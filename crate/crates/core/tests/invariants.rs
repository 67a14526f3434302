use proptest::prelude::*;

use hoflow::energy::{energy, threshold, threshold_sup};
use hoflow::initial::perturbed_circle;
use hoflow::{CurveSnapshot, DiffPoly, DiscreteCurve, SpaceForm};

fn space(i: usize) -> SpaceForm {
    [
        SpaceForm::euclidean(),
        SpaceForm::sphere(1.0),
        SpaceForm::hyperbolic(-1.0),
    ][i]
}

fn sample(i: usize, amp: f64, seed: u64) -> DiscreteCurve {
    perturbed_circle(&space(i), 0.8, amp, 5, seed, 96).unwrap()
}

fn rotate(c: &DiscreteCurve, angle: f64) -> DiscreteCurve {
    let (s, co) = angle.sin_cos();
    let v = c
        .vertices()
        .iter()
        .map(|p| [co * p[0] - s * p[1], s * p[0] + co * p[1]])
        .collect();
    DiscreteCurve::new(*c.space(), v).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn poly() -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec((-3i64..=3, 0usize..4, 0usize..4), 1..5).prop_map(|terms| {
        terms.into_iter().fold(DiffPoly::zero(), |acc, (c, i, j)| {
            let t = &(&DiffPoly::constant(c) * &DiffPoly::kappa(i)) * &DiffPoly::kappa(j);
            &acc + &t
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn chart_rotation_preserves_energy(i in 0usize..3, amp in 0.0..0.2, seed in 0u64..1000, angle in 0.0..6.3) {
        let c = sample(i, amp, seed);
        let r = rotate(&c, angle);
        for m in 1..=2 {
            prop_assert!(close(energy(&c, m).unwrap(), energy(&r, m).unwrap(), 1e-9));
        }
    }

    #[test]
    fn relabelling_and_orientation_preserve_energy(i in 0usize..3, seed in 0u64..1000, shift in 0usize..96) {
        let c = sample(i, 0.1, seed);
        let e = energy(&c, 2).unwrap();
        prop_assert!(close(e, energy(&c.rotated(shift), 2).unwrap(), 1e-10));
        prop_assert!(close(e, energy(&c.reversed(), 2).unwrap(), 1e-10));
    }

    #[test]
    fn weights_sum_to_length(i in 0usize..3, amp in 0.0..0.3, seed in 0u64..1000) {
        let m = sample(i, amp, seed).induced_metric();
        prop_assert!(m.weights.iter().all(|w| *w > 0.0));
        prop_assert!(close(m.weights.iter().sum::<f64>(), m.length, 1e-12));
    }

    #[test]
    fn curvature_flips_with_orientation(i in 0usize..3, seed in 0u64..1000) {
        let c = sample(i, 0.1, seed);
        let k = c.curvature_jet(0).unwrap().kappa(0).to_vec();
        let r = c.reversed();
        let kr = r.curvature_jet(0).unwrap().kappa(0).to_vec();
        let n = k.len();
        // reversed() keeps vertex 0 and walks backwards
        for j in 0..n {
            prop_assert!(close(k[j], -kr[(n - j) % n], 1e-9), "{} vs {}", k[j], kr[(n - j) % n]);
        }
    }

    #[test]
    fn snapshot_json_round_trip(i in 0usize..3, seed in 0u64..1000) {
        let c = sample(i, 0.15, seed);
        let text = serde_json::to_string(&CurveSnapshot::from(&c)).unwrap();
        let back: CurveSnapshot = serde_json::from_str(&text).unwrap();
        let back = back.into_curve().unwrap();
        prop_assert_eq!(back.vertices(), c.vertices());
    }

    #[test]
    fn derivative_is_a_derivation(a in poly(), b in poly()) {
        prop_assert_eq!((&a * &b).derivative(), &(&a.derivative() * &b) + &(&a * &b.derivative()));
        prop_assert_eq!((&a + &b).derivative(), &a.derivative() + &b.derivative());
    }

    #[test]
    fn threshold_never_exceeds_supremum(i in 0usize..3, t in 0.0f64..1.0) {
        let s = space(i);
        let iv = s.admissible_b_interval();
        let b2 = iv.lower + t * (iv.upper - iv.lower);
        if let Ok(v) = threshold(&s, b2) {
            prop_assert!(v <= threshold_sup(&s).value * (1.0 + 1e-12));
        }
    }
}
