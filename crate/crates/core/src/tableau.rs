//! Explicit Runge-Kutta coefficients and the internal SSP check.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients `(A, b, c)` of an explicit Runge-Kutta method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ButcherTableau {
    pub name: String,
    /// Strictly lower triangular, `stages x stages`.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
}

/// Weights of the Euler extrapolation methods of orders 2 to 5, one entry
/// per stage.
fn extrapolation_weights(order: usize) -> Option<Vec<f64>> {
    let w = match order {
        2 => vec![0.0, 1.0],
        3 => vec![0.0, -2.0, 1.5, 1.5],
        4 => vec![0.0, 2.0, -4.5, -4.5, 8.0 / 3.0, 8.0 / 3.0, 8.0 / 3.0],
        5 => {
            let mut w = vec![0.0, -4.0 / 3.0, 27.0 / 4.0, 27.0 / 4.0];
            w.extend([-32.0 / 3.0; 3]);
            w.extend([125.0 / 24.0; 4]);
            w
        }
        _ => return None,
    };
    Some(w)
}

/// One stage of an Euler extrapolation method:
/// `y_stage = y_source + dt / divisor * F(y_source)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EulerSubstep {
    pub source: usize,
    pub divisor: usize,
}

/// Sub-steps of the order-`order` Euler extrapolation method; entry `m - 1`
/// produces stage `m` (stage 0 is the step start).
pub fn extrapolation_substeps(order: usize) -> Vec<EulerSubstep> {
    let mut steps = Vec::new();
    let mut m = 0;
    for s in 2..=order {
        for k in 1..s {
            let source = if k == 1 { 0 } else { m };
            m += 1;
            steps.push(EulerSubstep { source, divisor: s });
        }
    }
    steps
}

impl ButcherTableau {
    pub fn stages(&self) -> usize {
        self.b.len()
    }

    /// Explicit Euler.
    pub fn euler() -> Self {
        Self {
            name: "euler".into(),
            a: vec![vec![0.0]],
            b: vec![1.0],
            c: vec![0.0],
        }
    }

    /// Five-stage fourth-order SSP method, converted from its Shu-Osher form.
    pub fn ssp54() -> Self {
        ShuOsher::ssp54().to_butcher("ssp54")
    }

    /// Euler extrapolation of the given order (2 to 5).
    pub fn extrapolated_euler(order: usize) -> Result<Self> {
        let b = extrapolation_weights(order)
            .ok_or_else(|| Error::Config(format!("no extrapolation weights for order {order}")))?;
        let m = b.len();
        let mut a = vec![vec![0.0; m]; m];
        for (idx, step) in extrapolation_substeps(order).iter().enumerate() {
            let row = idx + 1;
            let h = 1.0 / step.divisor as f64;
            if step.source > 0 {
                a[row] = a[step.source].clone();
            }
            a[row][step.source] += h;
        }
        let c = a.iter().map(|r| r.iter().sum()).collect();
        Ok(Self {
            name: format!("exe-rk{order}"),
            a,
            b,
            c,
        })
    }

    /// Eleven-stage fifth-order Euler extrapolation.
    pub fn exe_rk5() -> Self {
        Self::extrapolated_euler(5).expect("order 5 weights exist")
    }

    /// Seven-stage sixth-order method.
    pub fn rk76() -> Self {
        let a = vec![
            vec![],
            vec![1.0 / 3.0],
            vec![0.0, 2.0 / 3.0],
            vec![1.0 / 12.0, 1.0 / 3.0, -1.0 / 12.0],
            vec![-1.0 / 16.0, 9.0 / 8.0, -3.0 / 16.0, -3.0 / 8.0],
            vec![0.0, 9.0 / 8.0, -3.0 / 8.0, -3.0 / 4.0, 1.0 / 2.0],
            vec![
                9.0 / 44.0,
                -9.0 / 11.0,
                63.0 / 44.0,
                18.0 / 11.0,
                0.0,
                -16.0 / 11.0,
            ],
        ];
        let a = a
            .into_iter()
            .map(|mut r| {
                r.resize(7, 0.0);
                r
            })
            .collect();
        Self {
            name: "rk76".into(),
            a,
            b: vec![
                11.0 / 120.0,
                0.0,
                27.0 / 40.0,
                27.0 / 40.0,
                -4.0 / 15.0,
                -4.0 / 15.0,
                11.0 / 120.0,
            ],
            c: vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 / 3.0, 0.5, 0.5, 1.0],
        }
    }

    /// Looks up a built-in tableau by name.
    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "euler" => Ok(Self::euler()),
            "ssp54" => Ok(Self::ssp54()),
            "exe-rk5" => Ok(Self::exe_rk5()),
            "rk76" => Ok(Self::rk76()),
            _ => match name.strip_prefix("exe-rk").and_then(|o| o.parse().ok()) {
                Some(order) => Self::extrapolated_euler(order),
                None => Err(Error::Config(format!("unknown tableau '{name}'"))),
            },
        }
    }

    /// Checks shape, explicitness and the row-sum and consistency conditions.
    pub fn validate(&self) -> Result<()> {
        let m = self.stages();
        if m == 0 || self.a.len() != m || self.c.len() != m || self.a.iter().any(|r| r.len() != m) {
            return Err(Error::Config(format!(
                "tableau '{}' has inconsistent dimensions",
                self.name
            )));
        }
        for (i, row) in self.a.iter().enumerate() {
            if row[i..].iter().any(|&v| v != 0.0) {
                return Err(Error::Config(format!(
                    "tableau '{}' is not explicit (row {i})",
                    self.name
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - self.c[i]).abs() > 1e-12 {
                return Err(Error::Config(format!(
                    "tableau '{}': c[{i}] = {} but row sum is {sum}",
                    self.name, self.c[i]
                )));
            }
        }
        let bsum: f64 = self.b.iter().sum();
        if (bsum - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!(
                "tableau '{}': weights sum to {bsum}",
                self.name
            )));
        }
        Ok(())
    }
}

/// Shu-Osher representation: stage `m` (`1..=M`) is
/// `sum_l alpha[m-1][l] Y_l + dt sum_l beta[m-1][l] F(Y_l)` over earlier
/// stages `Y_0 = u^n, Y_1, ...`; the last row is the update.
#[derive(Debug, Clone, PartialEq)]
pub struct ShuOsher {
    pub alpha: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

impl ShuOsher {
    /// The printed coefficients, rounded so that every row of state weights
    /// sums to exactly one in binary; the last weight of each row absorbs
    /// the printed rounding, at most one unit in the 15th digit.
    pub fn ssp54() -> Self {
        let mut so = Self {
            alpha: vec![
                vec![1.0],
                vec![0.444370493651235, 0.555629506348765],
                vec![0.620101851488403, 0.0, 0.379898148511597],
                vec![0.178079954393132, 0.0, 0.0, 0.821920045606868],
                vec![
                    0.0,
                    0.0,
                    0.517231671970585,
                    0.096059710526147,
                    0.386708617503269,
                ],
            ],
            beta: vec![
                vec![0.391752226571890],
                vec![0.0, 0.368410593050371],
                vec![0.0, 0.0, 0.251891774271694],
                vec![0.0, 0.0, 0.0, 0.544974750228521],
                vec![0.0, 0.0, 0.0, 0.063692468666290, 0.226007483236906],
            ],
        };
        // Snapping to multiples of 2^-53 makes the row sum exact in binary.
        let unit = f64::EPSILON / 2.0;
        for row in &mut so.alpha {
            let last = row.iter().rposition(|&v| v != 0.0).expect("nonzero row");
            let mut others = 0.0;
            for (k, v) in row.iter_mut().enumerate() {
                if k != last {
                    *v = (*v / unit).round() * unit;
                    others += *v;
                }
            }
            row[last] = 1.0 - others;
        }
        so
    }

    /// Equivalent Butcher tableau.
    pub fn to_butcher(&self, name: &str) -> ButcherTableau {
        let m = self.alpha.len();
        // coef[l][k]: weight of dt F(Y_k) in Y_l.
        let mut coef: Vec<Vec<f64>> = vec![vec![0.0; m]];
        for row in 0..m {
            let mut w = vec![0.0; m];
            for (l, (&al, &be)) in self.alpha[row].iter().zip(&self.beta[row]).enumerate() {
                for k in 0..m {
                    w[k] += al * coef[l][k];
                }
                w[l] += be;
            }
            coef.push(w);
        }
        let b = coef.pop().expect("at least one row");
        let c = coef.iter().map(|r| r.iter().sum()).collect();
        ButcherTableau {
            name: name.into(),
            a: coef,
            b,
            c,
        }
    }
}

/// Outcome of [`check_internal_ssp`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SspReport {
    pub mu: f64,
    pub stages_ok: bool,
    pub update_ok: bool,
    /// Human-readable descriptions of the failing entries.
    pub violations: Vec<String>,
}

/// Round-off allowance of the entrywise inequalities.
pub const SSP_TOLERANCE: f64 = 1e-13;

/// Evaluates `X = (I + mu A)^{-1}` and checks `AX >= 0`, `AXe <= e`
/// (stage condition) and `b^T X >= 0`, `b^T X e <= 1` (update condition).
pub fn check_internal_ssp(tableau: &ButcherTableau, mu: f64) -> Result<SspReport> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Precondition(format!(
            "mu must be positive, got {mu}"
        )));
    }
    let m = tableau.stages();
    let x = inverse_unit_lower(&tableau.a, mu)?;
    let mut violations = Vec::new();

    let mut stages_ok = true;
    for i in 0..m {
        let mut row_sum = 0.0;
        for j in 0..m {
            let v: f64 = (0..m).map(|k| tableau.a[i][k] * x[k][j]).sum();
            row_sum += v;
            if v < -SSP_TOLERANCE {
                stages_ok = false;
                violations.push(format!("(AX)[{i}][{j}] = {v:.6e} < 0"));
            }
        }
        if row_sum > 1.0 + SSP_TOLERANCE {
            stages_ok = false;
            violations.push(format!("(AXe)[{i}] = {row_sum:.6e} > 1"));
        }
    }

    let mut update_ok = true;
    let mut total = 0.0;
    for j in 0..m {
        let v: f64 = (0..m).map(|k| tableau.b[k] * x[k][j]).sum();
        total += v;
        if v < -SSP_TOLERANCE {
            update_ok = false;
            violations.push(format!("(b^T X)[{j}] = {v:.6e} < 0"));
        }
    }
    if total > 1.0 + SSP_TOLERANCE {
        update_ok = false;
        violations.push(format!("b^T X e = {total:.6e} > 1"));
    }

    Ok(SspReport {
        mu,
        stages_ok,
        update_ok,
        violations,
    })
}

/// `(I + mu A)^{-1}` for lower triangular `A` by forward substitution.
fn inverse_unit_lower(a: &[Vec<f64>], mu: f64) -> Result<Vec<Vec<f64>>> {
    let m = a.len();
    if a.iter()
        .enumerate()
        .any(|(i, r)| r[i + 1..].iter().any(|&v| v != 0.0))
    {
        return Err(Error::Precondition("matrix is not lower triangular".into()));
    }
    let mut x = vec![vec![0.0; m]; m];
    for j in 0..m {
        for i in j..m {
            let diag = 1.0 + mu * a[i][i];
            if diag.abs() < 1e-14 {
                return Err(Error::Singular(format!(
                    "I + mu A has a zero pivot in row {i}"
                )));
            }
            let rhs = if i == j { 1.0 } else { 0.0 };
            let s: f64 = (j..i).map(|k| mu * a[i][k] * x[k][j]).sum();
            x[i][j] = (rhs - s) / diag;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_consistent() {
        for t in [
            ButcherTableau::euler(),
            ButcherTableau::ssp54(),
            ButcherTableau::exe_rk5(),
            ButcherTableau::rk76(),
        ] {
            t.validate().unwrap();
            for (row, &c) in t.a.iter().zip(&t.c) {
                assert!((row.iter().sum::<f64>() - c).abs() <= 1e-14, "{}", t.name);
            }
            assert!((t.b.iter().sum::<f64>() - 1.0).abs() <= 1e-14, "{}", t.name);
        }
        for order in 2..=5 {
            let t = ButcherTableau::extrapolated_euler(order).unwrap();
            t.validate().unwrap();
            assert_eq!(t.stages(), 1 + order * (order - 1) / 2);
        }
        assert!(ButcherTableau::extrapolated_euler(6).is_err());
    }

    #[test]
    fn exe_rk5_matches_printed_tableau() {
        let t = ButcherTableau::exe_rk5();
        assert_eq!(t.stages(), 11);
        let c = [
            0.0,
            0.5,
            1.0 / 3.0,
            2.0 / 3.0,
            0.25,
            0.5,
            0.75,
            0.2,
            0.4,
            0.6,
            0.8,
        ];
        for (x, y) in t.c.iter().zip(c) {
            assert!((x - y).abs() < 1e-15);
        }
        assert_eq!(t.a[3][2], 1.0 / 3.0);
        assert_eq!(t.a[6][4], 0.25);
        assert_eq!(t.a[6][5], 0.25);
        assert_eq!(t.a[10][9], 0.2);
        assert_eq!(t.a[10][1], 0.0);
    }

    #[test]
    fn substep_sources() {
        let s: Vec<(usize, usize)> = extrapolation_substeps(5)
            .iter()
            .map(|e| (e.source, e.divisor))
            .collect();
        assert_eq!(
            s,
            [
                (0, 2),
                (0, 3),
                (2, 3),
                (0, 4),
                (4, 4),
                (5, 4),
                (0, 5),
                (7, 5),
                (8, 5),
                (9, 5)
            ]
        );
    }

    #[test]
    fn shu_osher_weights_sum_to_one_exactly() {
        let unit = f64::EPSILON / 2.0;
        for row in ShuOsher::ssp54().alpha {
            let ticks: i64 = row
                .iter()
                .map(|&v| {
                    let t = v / unit;
                    assert_eq!(t.fract(), 0.0);
                    t as i64
                })
                .sum();
            assert_eq!(ticks, 1_i64 << 53);
        }
    }

    #[test]
    fn ssp54_butcher_form() {
        let t = ButcherTableau::ssp54();
        assert_eq!(t.stages(), 5);
        assert!((t.a[1][0] - 0.391752226571890).abs() < 1e-15);
        assert!(t.a.iter().flatten().all(|&v| v >= 0.0));
        assert!(t.b.iter().all(|&v| v >= 0.0));
        // Fourth-order conditions.
        let (b, c, a) = (&t.b, &t.c, &t.a);
        let dot = |x: &[f64]| b.iter().zip(x).map(|(p, q)| p * q).sum::<f64>();
        let c2: Vec<f64> = c.iter().map(|v| v * v).collect();
        let c3: Vec<f64> = c.iter().map(|v| v * v * v).collect();
        let ac: Vec<f64> = a
            .iter()
            .map(|r| r.iter().zip(c).map(|(p, q)| p * q).sum())
            .collect();
        assert!((dot(c) - 0.5).abs() < 1e-12);
        assert!((dot(&c2) - 1.0 / 3.0).abs() < 1e-12);
        assert!((dot(&ac) - 1.0 / 6.0).abs() < 1e-12);
        assert!((dot(&c3) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn ssp_verdicts() {
        let e = check_internal_ssp(&ButcherTableau::euler(), 10.0).unwrap();
        assert!(e.stages_ok && e.update_ok);
        let s = check_internal_ssp(&ButcherTableau::ssp54(), 1.0).unwrap();
        assert!(s.stages_ok && s.update_ok, "{:?}", s.violations);
        let x = check_internal_ssp(&ButcherTableau::exe_rk5(), 0.01).unwrap();
        assert!(x.stages_ok);
        assert!(!x.update_ok);
        assert!(!x.violations.is_empty());
        assert!(check_internal_ssp(&ButcherTableau::euler(), 0.0).is_err());
    }

    #[test]
    fn inverse_is_inverse() {
        let t = ButcherTableau::rk76();
        let mu = 0.7;
        let x = inverse_unit_lower(&t.a, mu).unwrap();
        for i in 0..7 {
            for j in 0..7 {
                let v: f64 = (0..7)
                    .map(|k| ((i == k) as u8 as f64 + mu * t.a[i][k]) * x[k][j])
                    .sum();
                assert!((v - (i == j) as u8 as f64).abs() < 1e-13);
            }
        }
    }
}
