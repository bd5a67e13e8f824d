//! Weighted Euclidean norm of a Newton update.

/// Update and current solution of one field.
#[derive(Clone, Copy, Debug)]
pub struct FieldUpdate<'a> {
    pub update: &'a [f64],
    pub solution: &'a [f64],
    /// Scale `S_j` below which a solution component is not used as weight.
    pub scale: f64,
}

/// `err = sqrt(1/M) · sqrt(Σ_j (1/N_j) Σ_i (|E_ij| / W_ij)²)`, `W_ij = max(|U_ij|, S_j)`.
///
/// Fields without components do not count towards `M`.
pub fn error_norm(fields: &[FieldUpdate<'_>]) -> f64 {
    let mut m = 0usize;
    let mut total = 0.0;
    for f in fields {
        debug_assert_eq!(f.update.len(), f.solution.len());
        let n = f.update.len();
        if n == 0 {
            continue;
        }
        m += 1;
        let s: f64 = f
            .update
            .iter()
            .zip(f.solution)
            .map(|(e, u)| {
                let r = e.abs() / u.abs().max(f.scale);
                r * r
            })
            .sum();
        total += s / n as f64;
    }
    if m == 0 {
        return 0.0;
    }
    (total / m as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_dof_hand_value() {
        let err = error_norm(&[FieldUpdate {
            update: &[1e-5],
            solution: &[0.5],
            scale: 1.0,
        }]);
        assert!((err - 1e-5).abs() < 1e-20);
    }

    #[test]
    fn zero_update_and_duplicated_fields() {
        let z = [0.0; 3];
        assert_eq!(
            error_norm(&[FieldUpdate {
                update: &z,
                solution: &[1.0, 2.0, 3.0],
                scale: 1.0
            }]),
            0.0
        );
        let f = FieldUpdate {
            update: &[1e-3, -2e-3],
            solution: &[0.1, 4.0],
            scale: 0.5,
        };
        assert!((error_norm(&[f]) - error_norm(&[f, f])).abs() < 1e-18);
    }

    mod props {
        use super::super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn invariant_under_field_scaling(
                u in proptest::collection::vec((-1.0..1.0f64, -10.0..10.0f64), 1..20),
                p in proptest::collection::vec((-1.0..1.0f64, 0.0..1.0f64), 1..20),
                c in 1e-6..1e6f64,
            ) {
                let (du, x): (Vec<f64>, Vec<f64>) = u.iter().cloned().unzip();
                let (dp, y): (Vec<f64>, Vec<f64>) = p.iter().cloned().unzip();
                let base = error_norm(&[
                    FieldUpdate { update: &du, solution: &x, scale: 0.1 },
                    FieldUpdate { update: &dp, solution: &y, scale: 1.0 },
                ]);
                let (sdu, sx): (Vec<f64>, Vec<f64>) = u.iter().map(|(a, b)| (c * a, c * b)).unzip();
                let scaled = error_norm(&[
                    FieldUpdate { update: &sdu, solution: &sx, scale: c * 0.1 },
                    FieldUpdate { update: &dp, solution: &y, scale: 1.0 },
                ]);
                prop_assert!((scaled - base).abs() <= 1e-12 * base.max(1e-300));
            }

            #[test]
            fn homogeneous_in_the_update(u in proptest::collection::vec(-1.0..1.0f64, 1..20), k in 0.0..100.0f64) {
                let x = vec![1.0; u.len()];
                let ku: Vec<f64> = u.iter().map(|v| k * v).collect();
                let a = error_norm(&[FieldUpdate { update: &u, solution: &x, scale: 1.0 }]);
                let b = error_norm(&[FieldUpdate { update: &ku, solution: &x, scale: 1.0 }]);
                prop_assert!((b - k * a).abs() <= 1e-12 * (1.0 + b));
            }
        }
    }
}
