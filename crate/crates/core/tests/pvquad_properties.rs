use proptest::prelude::*;
use stable_exit::pvquad::{apply_kv, getoor_identity_check};
use stable_exit::{PvQuadSpec, StabilityIndex};

const ALPHAS: [f64; 7] = [0.3, 0.5, 0.8, 1.0, 1.2, 1.5, 1.8];
const TOL: f64 = 1e-6;

fn a(v: f64) -> StabilityIndex {
    StabilityIndex::new(v).unwrap()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|c| c * c).sum::<f64>().sqrt()
}

/// Orthogonal matrix from Gram–Schmidt on the rows of `m`.
fn orthonormalize(mut m: Vec<Vec<f64>>) -> Option<Vec<Vec<f64>>> {
    for i in 0..m.len() {
        for j in 0..i {
            let dot: f64 = m[i].iter().zip(&m[j]).map(|(x, y)| x * y).sum();
            let prev = m[j].clone();
            for (x, y) in m[i].iter_mut().zip(prev) {
                *x -= dot * y;
            }
        }
        let n = norm(&m[i]);
        if n < 1e-3 {
            return None;
        }
        m[i].iter_mut().for_each(|x| *x /= n);
    }
    Some(m)
}

fn mul(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

fn case(d: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (
        prop::collection::vec(-1.0f64..1.0, d).prop_filter("non-zero", |v| norm(v) > 0.05),
        prop::collection::vec(-1.0f64..1.0, d),
        0.2f64..0.95,
    )
        .prop_map(|(v, x, frac)| {
            let nx = norm(&x).max(1e-12);
            let x = x.iter().map(|c| c / nx * frac * nx.min(1.0)).collect();
            (v, x, 1.0)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn scaling_in_v(alpha_i in 0usize..7, (v, x, r) in (1usize..4).prop_flat_map(case)) {
        let spec = PvQuadSpec::default();
        let alpha = ALPHAS[alpha_i];
        let base = apply_kv(&v, &x, r, a(alpha), &spec).unwrap().value;
        for lambda in [0.5, 2.0, 10.0] {
            let scaled_v: Vec<f64> = v.iter().map(|c| lambda * c).collect();
            let scaled = apply_kv(&scaled_v, &x, r, a(alpha), &spec).unwrap().value;
            let factor = f64::powf(lambda, alpha);
            prop_assert!((scaled - factor * base).abs() <= 2.0 * TOL * factor.max(1.0),
                "lambda {}: {} vs {}", lambda, scaled, factor * base);
        }
    }

    #[test]
    fn rotation_equivariance(
        alpha_i in 0usize..7,
        (v, x, r) in case(3),
        basis in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 3),
    ) {
        let Some(rot) = orthonormalize(basis) else { return Ok(()); };
        let spec = PvQuadSpec::default();
        let alpha = a(ALPHAS[alpha_i]);
        let plain = apply_kv(&v, &x, r, alpha, &spec).unwrap().value;
        let rotated = apply_kv(&mul(&rot, &v), &mul(&rot, &x), r, alpha, &spec).unwrap().value;
        prop_assert!((plain - rotated).abs() <= 2.0 * TOL * norm(&v).powf(alpha.get()).max(1.0));
    }
}

#[test]
fn identity_holds_across_the_interval() {
    let spec = PvQuadSpec::default();
    for alpha in ALPHAS {
        for r in [0.5, 1.0, 3.0] {
            for k in 0..20 {
                let u = (-0.95 + 1.9 * k as f64 / 19.0) * r;
                let value = getoor_identity_check(u, r, a(alpha), &spec).unwrap().value;
                assert!(
                    (value + 1.0).abs() <= TOL,
                    "alpha {alpha} r {r} u {u}: {value}"
                );
            }
        }
    }
}

#[test]
fn lemma_value_for_unit_direction_at_centre() {
    let spec = PvQuadSpec::default();
    for alpha in ALPHAS {
        let v = apply_kv(&[1.0, 0.0, 0.0], &[0.0; 3], 1.0, a(alpha), &spec).unwrap();
        assert!((v.value + 1.0).abs() <= TOL);
        assert!(v.error_estimate < TOL);
    }
}
