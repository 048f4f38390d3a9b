//! Joint and conditional outcome tables for two measured subsystems with
//! two outcomes each (`a1`/`a2`, `b1`/`b2`).

use serde::Serialize;

use crate::error::{Error, Result};

/// `p_ij = P(a_i & b_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointTable {
    pub p11: f64,
    pub p12: f64,
    pub p21: f64,
    pub p22: f64,
}

fn unit(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfRange { name, value })
    }
}

/// Independent subsystems: `P(a_i & b_j) = P(a_i) P(b_j)`.
pub fn product_table(pa: f64, pb: f64) -> Result<JointTable> {
    let (pa, pb) = (unit("pa", pa)?, unit("pb", pb)?);
    Ok(JointTable {
        p11: pa * pb,
        p12: pa * (1.0 - pb),
        p21: (1.0 - pa) * pb,
        p22: (1.0 - pa) * (1.0 - pb),
    })
}

/// Mixture `p (a1 b1) + (1 - p) (a2 b2)`: outcomes always agree.
pub fn entangled_table(p: f64) -> Result<JointTable> {
    let p = unit("p", p)?;
    Ok(JointTable { p11: p, p12: 0.0, p21: 0.0, p22: 1.0 - p })
}

impl JointTable {
    pub fn cells(&self) -> [[f64; 2]; 2] {
        [[self.p11, self.p12], [self.p21, self.p22]]
    }

    pub fn total(&self) -> f64 {
        self.p11 + self.p12 + self.p21 + self.p22
    }

    /// `(P(a1), P(a2))`
    pub fn marginal_a(&self) -> [f64; 2] {
        [self.p11 + self.p12, self.p21 + self.p22]
    }

    /// `(P(b1), P(b2))`
    pub fn marginal_b(&self) -> [f64; 2] {
        [self.p11 + self.p21, self.p12 + self.p22]
    }

    /// `(P(a1|b_j), P(a2|b_j))` for column `j` in `{1, 2}`.
    pub fn conditional_column(&self, column: usize) -> Result<[f64; 2]> {
        let c = self.cells();
        let j = column - 1;
        let m = self.marginal_b()[j];
        if m <= 0.0 {
            return Err(Error::UndefinedConditional { column });
        }
        Ok([c[0][j] / m, c[1][j] / m])
    }

    /// `out[i][j] = P(a_{i+1} | b_{j+1})`.
    pub fn conditionals(&self) -> Result<[[f64; 2]; 2]> {
        let c1 = self.conditional_column(1)?;
        let c2 = self.conditional_column(2)?;
        Ok([[c1[0], c2[0]], [c1[1], c2[1]]])
    }

    /// Largest `|P(a_i & b_j) - P(a_i) P(b_j)|`; zero for separable tables.
    pub fn product_rule_violation(&self) -> f64 {
        let (ma, mb, c) = (self.marginal_a(), self.marginal_b(), self.cells());
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((c[i][j] - ma[i] * mb[j]).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn product_examples() {
        let t = product_table(1.0, 1.0).unwrap();
        assert_eq!(t, JointTable { p11: 1.0, p12: 0.0, p21: 0.0, p22: 0.0 });
        let t = product_table(0.5, 0.5).unwrap();
        assert!(t.cells().iter().flatten().all(|&v| v == 0.25));
        let t = product_table(0.3, 0.6).unwrap();
        for (got, want) in [t.p11, t.p12, t.p21, t.p22].iter().zip([0.18, 0.12, 0.42, 0.28]) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-15);
        }
        assert_eq!(product_table(1.2, 0.1), Err(Error::OutOfRange { name: "pa", value: 1.2 }));
        assert!(product_table(0.1, f64::NAN).is_err());
    }

    #[test]
    fn entangled_examples() {
        assert_eq!(entangled_table(1.0).unwrap(), JointTable { p11: 1.0, p12: 0.0, p21: 0.0, p22: 0.0 });
        let t = entangled_table(0.5).unwrap();
        assert_eq!(t, JointTable { p11: 0.5, p12: 0.0, p21: 0.0, p22: 0.5 });
        assert_eq!(t.conditionals().unwrap(), [[1.0, 0.0], [0.0, 1.0]]);
        assert!(entangled_table(-0.1).is_err());
    }

    #[test]
    fn undefined_column() {
        let t = entangled_table(1.0).unwrap();
        assert_eq!(t.conditional_column(1).unwrap(), [1.0, 0.0]);
        assert_eq!(t.conditionals(), Err(Error::UndefinedConditional { column: 2 }));
    }

    #[test]
    fn product_conditionals_ignore_b() {
        let t = product_table(0.3, 0.6).unwrap();
        let c = t.conditionals().unwrap();
        assert_abs_diff_eq!(c[0][0], c[0][1], epsilon = 1e-15);
        assert_abs_diff_eq!(c[0][0], 0.3, epsilon = 1e-15);
        assert!(t.product_rule_violation() < 1e-15);
    }

    #[test]
    fn entangled_witness() {
        for p in [0.1, 0.5, 0.8] {
            let t = entangled_table(p).unwrap();
            let bound = f64::min(p, 1.0 - p).powi(2);
            assert!(t.product_rule_violation() >= bound - 1e-15);
        }
    }

    #[test]
    fn json_shape() {
        let t = entangled_table(0.5).unwrap();
        let v = serde_json::to_value(t).unwrap();
        assert_eq!(v, serde_json::json!({"p11": 0.5, "p12": 0.0, "p21": 0.0, "p22": 0.5}));
    }
}
