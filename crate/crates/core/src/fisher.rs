//! Fisher information matrices and design objectives.

use crate::error::{Error, Result};
use crate::linalg::SpdMatrix;
use crate::link::mudot;
use crate::pulls::PullLog;
use crate::types::{ArmSet, DesignWeights, Theta};

/// `H_lambda(theta) = sum_x lambda_x mudot(x^T theta) x x^T`.
pub fn fisher_weighted(arms: &ArmSet, weights: &DesignWeights, theta: &Theta) -> Result<SpdMatrix> {
    arms.check_theta(theta)?;
    if weights.len() != arms.len() {
        return Err(Error::DimensionMismatch {
            expected: arms.len(),
            got: weights.len(),
        });
    }
    let mut h = SpdMatrix::zeros(arms.dim());
    for (arm, &w) in arms.iter().zip(weights.as_slice()) {
        if w > 0.0 {
            h.add_outer(w * mudot(arm.dot(theta)), arm.coords());
        }
    }
    Ok(h)
}

/// `sum_x lambda_x v_x x x^T` for arbitrary per-arm variances `v_x`.
pub fn information_with_variances(arms: &ArmSet, weights: &[f64], variances: &[f64]) -> SpdMatrix {
    let mut h = SpdMatrix::zeros(arms.dim());
    for ((arm, &w), &v) in arms.iter().zip(weights).zip(variances) {
        if w > 0.0 {
            h.add_outer(w * v, arm.coords());
        }
    }
    h
}

/// Unnormalized `H_t(theta) = sum_s mudot(x_s^T theta) x_s x_s^T` from counts.
pub fn fisher_counts(arms: &ArmSet, pulls: &PullLog, theta: &Theta) -> Result<SpdMatrix> {
    arms.check_theta(theta)?;
    if pulls.num_arms() != arms.len() {
        return Err(Error::DimensionMismatch {
            expected: arms.len(),
            got: pulls.num_arms(),
        });
    }
    let mut h = SpdMatrix::zeros(arms.dim());
    for (arm, &n) in arms.iter().zip(pulls.pulls()) {
        if n > 0 {
            h.add_outer(n as f64 * mudot(arm.dot(theta)), arm.coords());
        }
    }
    Ok(h)
}

/// `max_{x in active} ||x||^2_{H^{-1}}` with `H = H_lambda(theta)` (G objective).
pub fn g_value(
    arms: &ArmSet,
    active: &[usize],
    weights: &DesignWeights,
    theta: &Theta,
) -> Result<f64> {
    g_value_ridged(arms, active, weights, theta, 0.0)
}

pub fn g_value_ridged(
    arms: &ArmSet,
    active: &[usize],
    weights: &DesignWeights,
    theta: &Theta,
    ridge: f64,
) -> Result<f64> {
    objective_value(arms, active, weights, theta, ridge, |_| 1.0)
}

/// `max_{x in active} mudot(x^T theta)^2 ||x||^2_{H^{-1}}` (H objective).
pub fn h_value(
    arms: &ArmSet,
    active: &[usize],
    weights: &DesignWeights,
    theta: &Theta,
) -> Result<f64> {
    h_value_ridged(arms, active, weights, theta, 0.0)
}

pub fn h_value_ridged(
    arms: &ArmSet,
    active: &[usize],
    weights: &DesignWeights,
    theta: &Theta,
    ridge: f64,
) -> Result<f64> {
    objective_value(arms, active, weights, theta, ridge, |z| {
        let v = mudot(z);
        v * v
    })
}

fn objective_value(
    arms: &ArmSet,
    active: &[usize],
    weights: &DesignWeights,
    theta: &Theta,
    ridge: f64,
    scale: impl Fn(f64) -> f64,
) -> Result<f64> {
    if active.is_empty() {
        return Err(Error::InvalidArgument("empty active set".into()));
    }
    let h = fisher_weighted(arms, weights, theta)?;
    let f = h.factor(ridge)?;
    Ok(active
        .iter()
        .map(|&i| {
            let x = arms.get(i);
            scale(x.dot(theta)) * f.inv_quad(x.coords())
        })
        .fold(f64::NEG_INFINITY, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::mudot;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn one_point_design_at_zero() {
        let arms = ArmSet::from_rows(vec![vec![1.0, 0.0]]).unwrap();
        let h = fisher_weighted(&arms, &DesignWeights::uniform(1), &Theta::zeros(2)).unwrap();
        assert_eq!(h.get(0, 0), 0.25);
        assert_eq!(h.get(0, 1), 0.0);
        assert_eq!(h.get(1, 1), 0.0);
    }

    #[test]
    fn uniform_basis_at_zero() {
        let arms = ArmSet::canonical(2);
        let h = fisher_weighted(&arms, &DesignWeights::uniform(2), &Theta::zeros(2)).unwrap();
        assert_eq!(h.get(0, 0), 0.125);
        assert_eq!(h.get(1, 1), 0.125);
        assert_eq!(h.get(0, 1), 0.0);
    }

    #[test]
    fn weighted_basis_off_center() {
        let arms = ArmSet::canonical(2);
        let w = DesignWeights::new(vec![0.3, 0.7]).unwrap();
        let theta = Theta::new(vec![2.0, 0.0]).unwrap();
        let h = fisher_weighted(&arms, &w, &theta).unwrap();
        // mudot(2) = e^2 / (1 + e^2)^2
        let e2 = 2f64.exp();
        assert!(close(
            h.get(0, 0),
            0.3 * e2 / ((1.0 + e2) * (1.0 + e2)),
            1e-14
        ));
        assert!(close(h.get(1, 1), 0.7 * 0.25, 1e-15));
    }

    #[test]
    fn theta_dimension_checked() {
        let arms = ArmSet::canonical(2);
        let r = fisher_weighted(&arms, &DesignWeights::uniform(2), &Theta::zeros(3));
        assert!(matches!(r, Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn counts_fisher() {
        let arms = ArmSet::canonical(1);
        let pulls = PullLog::from_counts(vec![10], vec![3]);
        let h = fisher_counts(&arms, &pulls, &Theta::zeros(1)).unwrap();
        assert_eq!(h.get(0, 0), 2.5);

        let arms = ArmSet::canonical(2);
        let pulls = PullLog::from_counts(vec![4, 6], vec![1, 1]);
        let h = fisher_counts(&arms, &pulls, &Theta::zeros(2)).unwrap();
        assert_eq!(h.get(0, 0), 1.0);
        assert_eq!(h.get(1, 1), 1.5);

        let arms3 =
            ArmSet::from_rows(vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.6, 0.8]]).unwrap();
        let with_zero = PullLog::from_counts(vec![4, 6, 0], vec![0, 0, 0]);
        let h3 = fisher_counts(&arms3, &with_zero, &Theta::zeros(2)).unwrap();
        assert_eq!(h3, h);
    }

    #[test]
    fn g_and_h_values_on_basis() {
        let arms = ArmSet::canonical(2);
        let w = DesignWeights::uniform(2);
        let g = g_value(&arms, &[0, 1], &w, &Theta::zeros(2)).unwrap();
        assert!(close(g, 8.0, 1e-14));
        let h = h_value(&arms, &[0, 1], &w, &Theta::zeros(2)).unwrap();
        assert!(close(h, g / 16.0, 1e-14));
    }

    #[test]
    fn single_active_arm_closed_form() {
        let arms = ArmSet::from_rows(vec![vec![0.6]]).unwrap();
        let theta = Theta::new(vec![1.5]).unwrap();
        let g = g_value(&arms, &[0], &DesignWeights::uniform(1), &theta).unwrap();
        assert!(close(g, 1.0 / mudot(0.9), 1e-13));
    }

    #[test]
    fn non_spanning_is_singular_without_ridge() {
        let arms = ArmSet::canonical(2);
        let w = DesignWeights::point_mass(2, 0);
        assert_eq!(
            g_value(&arms, &[0, 1], &w, &Theta::zeros(2)),
            Err(Error::Singular)
        );
        assert!(g_value_ridged(&arms, &[0], &w, &Theta::zeros(2), 1e-12).is_ok());
    }

    #[test]
    fn fisher_linear_in_weights() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let arms = ArmSet::from_rows(
            (0..6)
                .map(|_| {
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    vec![0.9 * a.cos(), 0.9 * a.sin()]
                })
                .collect(),
        )
        .unwrap();
        let theta = Theta::new(vec![1.2, -0.4]).unwrap();
        for _ in 0..50 {
            let l1 =
                DesignWeights::from_unnormalized((0..6).map(|_| rng.random::<f64>()).collect())
                    .unwrap();
            let l2 =
                DesignWeights::from_unnormalized((0..6).map(|_| rng.random::<f64>()).collect())
                    .unwrap();
            let a: f64 = rng.random();
            let mix: Vec<f64> = l1
                .as_slice()
                .iter()
                .zip(l2.as_slice())
                .map(|(x, y)| a * x + (1.0 - a) * y)
                .collect();
            let hm = fisher_weighted(&arms, &DesignWeights::from_raw(mix), &theta).unwrap();
            let h1 = fisher_weighted(&arms, &l1, &theta).unwrap();
            let h2 = fisher_weighted(&arms, &l2, &theta).unwrap();
            let lin = h1.matrix() * a + h2.matrix() * (1.0 - a);
            assert!((hm.matrix() - lin).abs().max() < 1e-12);
        }
    }

    #[test]
    fn g_and_h_are_midpoint_convex() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let arms = ArmSet::from_rows(
            (0..5)
                .map(|_| {
                    let a: f64 = rng.random_range(0.0..std::f64::consts::TAU);
                    vec![a.cos(), a.sin()]
                })
                .collect(),
        )
        .unwrap();
        let theta = Theta::new(vec![2.0, 1.0]).unwrap();
        let active: Vec<usize> = (0..5).collect();
        for _ in 0..100 {
            let l1 = DesignWeights::from_unnormalized(
                (0..5).map(|_| rng.random::<f64>() + 0.01).collect(),
            )
            .unwrap();
            let l2 = DesignWeights::from_unnormalized(
                (0..5).map(|_| rng.random::<f64>() + 0.01).collect(),
            )
            .unwrap();
            let mid = DesignWeights::from_raw(
                l1.as_slice()
                    .iter()
                    .zip(l2.as_slice())
                    .map(|(x, y)| 0.5 * (x + y))
                    .collect(),
            );
            for f in [g_value, h_value] {
                let a = f(&arms, &active, &l1, &theta).unwrap();
                let b = f(&arms, &active, &l2, &theta).unwrap();
                let m = f(&arms, &active, &mid, &theta).unwrap();
                assert!(m <= 0.5 * (a + b) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn self_concordance_sandwich() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100_000 {
            let z: f64 = rng.random_range(-30.0..30.0);
            let dz: f64 = rng.random_range(-1.0..=1.0);
            let r = mudot(z) / mudot(z + dz);
            assert!((1.0 / 3.0..=3.0).contains(&r), "z={z} dz={dz} r={r}");
        }
    }
}
