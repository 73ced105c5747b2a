//! Explicit Butcher tableaus: construction, validation and the direct
//! coefficient-sum form of the low-order energy-preservation conditions.

pub mod io;
pub mod registry;

pub use registry::{lookup, registry, rk22};

use std::fmt;

use serde::Serialize;

use crate::bseries::{pep_profile, Tolerances};
use crate::error::{Error, Result};
use crate::scalar::{Coeff, Rational, Scalar};

/// Row-sum and weight-sum tolerance for float tableaus.
pub const FLOAT_CONSISTENCY_TOL: f64 = 1e-12;

/// Default order cap used by [`validate`].
pub const VALIDATE_CAP: usize = 8;

/// Coefficients `(A, b, c)` of an explicit Runge-Kutta method.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTableau<S> {
    name: String,
    a: Vec<Vec<S>>,
    b: Vec<S>,
    c: Vec<S>,
    claimed: Option<(usize, usize)>,
}

impl<S: Coeff> ButcherTableau<S> {
    /// Rows of `a` may be ragged (missing entries are zero) but every entry on
    /// or above the diagonal must vanish. When `c` is omitted it is taken from
    /// the row sums.
    pub fn new(name: impl Into<String>, a: Vec<Vec<S>>, b: Vec<S>, c: Option<Vec<S>>) -> Result<Self> {
        let name = name.into();
        let s = b.len();
        let mut issues = Vec::new();
        if s == 0 {
            issues.push("b is empty".to_string());
        }
        if a.len() > s {
            issues.push(format!("A has {} rows but b has {s} entries", a.len()));
        }
        let mut full = vec![vec![S::zero(); s]; s];
        for (i, row) in a.iter().enumerate().take(s) {
            if row.len() > s {
                issues.push(format!("row {} of A has {} entries, expected at most {s}", i + 1, row.len()));
            }
            for (j, x) in row.iter().enumerate().take(s) {
                if j >= i && !x.is_zero() {
                    issues.push(format!("a{}{} is nonzero; only explicit methods are supported", i + 1, j + 1));
                }
                full[i][j] = x.clone();
            }
        }
        let c = match c {
            Some(c) => {
                if c.len() != s {
                    issues.push(format!("c has {} entries but b has {s}", c.len()));
                }
                c
            }
            None => full
                .iter()
                .map(|row| row.iter().fold(S::zero(), |acc, x| acc + x.clone()))
                .collect(),
        };
        if !issues.is_empty() {
            return Err(Error::InvalidTableau { name, issues });
        }
        Ok(ButcherTableau {
            name,
            a: full,
            b,
            c,
            claimed: None,
        })
    }

    /// Records the `(p, q)` pair the method is published with.
    pub fn with_claim(mut self, p: usize, q: usize) -> Self {
        self.claimed = Some((p, q));
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn a(&self, i: usize, j: usize) -> &S {
        &self.a[i][j]
    }

    /// Full `s × s` matrix.
    pub fn a_matrix(&self) -> &[Vec<S>] {
        &self.a
    }

    pub fn b(&self) -> &[S] {
        &self.b
    }

    pub fn c(&self) -> &[S] {
        &self.c
    }

    pub fn claimed(&self) -> Option<(usize, usize)> {
        self.claimed
    }

    pub fn map<T: Coeff>(&self, f: impl Fn(&S) -> T) -> ButcherTableau<T> {
        ButcherTableau {
            name: self.name.clone(),
            a: self.a.iter().map(|r| r.iter().map(&f).collect()).collect(),
            b: self.b.iter().map(&f).collect(),
            c: self.c.iter().map(&f).collect(),
            claimed: self.claimed,
        }
    }
}

impl<S: Scalar> ButcherTableau<S> {
    pub fn to_f64(&self) -> ButcherTableau<f64> {
        self.map(Scalar::to_f64)
    }

    /// Violations of `c_i = Σ_j a_ij` and `Σ b_i = 1`.
    pub fn consistency_issues(&self) -> Vec<String> {
        let close = |x: &S, y: &S| (x.clone() - y.clone()).is_negligible(FLOAT_CONSISTENCY_TOL);
        let mut issues = Vec::new();
        for (i, row) in self.a.iter().enumerate() {
            let sum = row.iter().fold(S::zero(), |acc, x| acc + x.clone());
            if !close(&sum, &self.c[i]) {
                issues.push(format!(
                    "c{} = {} but row {} of A sums to {}",
                    i + 1,
                    self.c[i].to_f64(),
                    i + 1,
                    sum.to_f64()
                ));
            }
        }
        let bsum = self.b.iter().fold(S::zero(), |acc, x| acc + x.clone());
        if !close(&bsum, &S::one()) {
            issues.push(format!("Σb = {} (expected 1)", bsum.to_f64()));
        }
        issues
    }
}

/// A tableau with either exact or floating-point entries.
#[derive(Clone, Debug, PartialEq)]
pub enum Tableau {
    Exact(ButcherTableau<Rational>),
    Float(ButcherTableau<f64>),
}

impl Tableau {
    pub fn name(&self) -> &str {
        match self {
            Tableau::Exact(t) => t.name(),
            Tableau::Float(t) => t.name(),
        }
    }

    pub fn stages(&self) -> usize {
        match self {
            Tableau::Exact(t) => t.stages(),
            Tableau::Float(t) => t.stages(),
        }
    }

    pub fn claimed(&self) -> Option<(usize, usize)> {
        match self {
            Tableau::Exact(t) => t.claimed(),
            Tableau::Float(t) => t.claimed(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Tableau::Exact(_))
    }

    /// Float view used for integration; exact entries are rounded.
    pub fn to_f64(&self) -> ButcherTableau<f64> {
        match self {
            Tableau::Exact(t) => t.to_f64(),
            Tableau::Float(t) => t.clone(),
        }
    }
}

impl From<ButcherTableau<Rational>> for Tableau {
    fn from(t: ButcherTableau<Rational>) -> Self {
        Tableau::Exact(t)
    }
}

impl From<ButcherTableau<f64>> for Tableau {
    fn from(t: ButcherTableau<f64>) -> Self {
        Tableau::Float(t)
    }
}

/// Outcome of [`validate`].
#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub name: String,
    pub stages: usize,
    pub exact: bool,
    pub classical_order: usize,
    pub pep_order: usize,
    pub cap: usize,
    pub claimed: Option<(usize, usize)>,
    /// `(order, defect norm)` for orders `2..=cap`.
    pub defects: Vec<(usize, f64)>,
}

impl ValidationReport {
    /// `None` when nothing was claimed.
    pub fn matches_claim(&self) -> Option<bool> {
        self.claimed
            .map(|(p, q)| p == self.classical_order && q == self.pep_order)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "method: {}", self.name)?;
        writeln!(f, "stages: {}", self.stages)?;
        writeln!(f, "arithmetic: {}", if self.exact { "exact" } else { "float" })?;
        writeln!(f, "classical order p: {}", self.classical_order)?;
        writeln!(f, "PEP order q: {} (cap {})", self.pep_order, self.cap)?;
        if let Some((p, q)) = self.claimed {
            let verdict = if self.matches_claim() == Some(true) { "ok" } else { "MISMATCH" };
            writeln!(f, "claimed (p, q): ({p}, {q}) {verdict}")?;
        }
        writeln!(f, "order  defect")?;
        for (n, d) in &self.defects {
            writeln!(f, "{n:>5}  {d:.3e}")?;
        }
        Ok(())
    }
}

/// Checks the tableau invariants, then reports the classical and PEP orders.
/// Inconsistent tableaus yield [`Error::InvalidTableau`] listing every
/// offending entry.
pub fn validate(t: &Tableau) -> Result<ValidationReport> {
    validate_with(t, VALIDATE_CAP, &Tolerances::default())
}

pub fn validate_with(t: &Tableau, cap: usize, tol: &Tolerances) -> Result<ValidationReport> {
    let issues = match t {
        Tableau::Exact(t) => t.consistency_issues(),
        Tableau::Float(t) => t.consistency_issues(),
    };
    if !issues.is_empty() {
        return Err(Error::InvalidTableau {
            name: t.name().to_string(),
            issues,
        });
    }
    let profile = match t {
        Tableau::Exact(t) => pep_profile(t, cap, tol)?,
        Tableau::Float(t) => pep_profile(t, cap, tol)?,
    };
    Ok(ValidationReport {
        name: t.name().to_string(),
        stages: t.stages(),
        exact: t.is_exact(),
        classical_order: profile.classical_order,
        pep_order: profile.pep_order,
        cap,
        claimed: t.claimed(),
        defects: profile.defects,
    })
}

/// Sums of products of tableau coefficients, built incrementally.
struct Sums<'a, S> {
    t: &'a ButcherTableau<S>,
}

impl<S: Coeff> Sums<'_, S> {
    fn dot(&self, x: &[S], y: &[S]) -> S {
        x.iter().zip(y).fold(S::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
    }

    /// `A x`
    fn a(&self, x: &[S]) -> Vec<S> {
        self.t.a.iter().map(|row| self.dot(row, x)).collect()
    }

    fn times(&self, x: &[S], y: &[S]) -> Vec<S> {
        x.iter().zip(y).map(|(a, b)| a.clone() * b.clone()).collect()
    }

    /// `bᵀ x`
    fn b(&self, x: &[S]) -> S {
        self.dot(&self.t.b, x)
    }
}

/// Residuals (`lhs − rhs`) of the printed Butcher-coefficient form of the
/// PEP-order-`q` conditions, `q ∈ {3, 4, 5}`, for methods of classical order
/// two. Computed straight from `(A, b, c)`.
pub fn pep_residuals<S: Coeff>(t: &ButcherTableau<S>, q: usize) -> Result<Vec<(String, S)>> {
    let z = Sums { t };
    let r = |n, d| S::from_rational(&crate::scalar::rat(n, d));
    let c = t.c.clone();
    let c2 = z.times(&c, &c);
    let c3 = z.times(&c2, &c);
    let ac = z.a(&c);
    let ac2 = z.a(&c2);
    let aac = z.a(&ac);
    let out = match q {
        3 => vec![("Σ b c² = 1/3".to_string(), z.b(&c2) - r(1, 3))],
        4 => vec![
            (
                "Σ b A A c = Σ b A c − 1/8".to_string(),
                z.b(&aac) - z.b(&ac) + r(1, 8),
            ),
            (
                "Σ b c (A c) − ½ Σ b A c² = 1/12".to_string(),
                z.b(&z.times(&c, &ac)) - r(1, 2) * z.b(&ac2) - r(1, 12),
            ),
            ("Σ b c³ = 1/4".to_string(), z.b(&c3) - r(1, 4)),
        ],
        5 => vec![
            (
                "Σ b c (A A c) + ½ Σ b A A c² = Σ b A A c + ½ Σ b A c² − ½ Σ b A c + 1/24".to_string(),
                z.b(&z.times(&c, &aac)) + r(1, 2) * z.b(&z.a(&ac2))
                    - z.b(&aac)
                    - r(1, 2) * z.b(&ac2)
                    + r(1, 2) * z.b(&ac)
                    - r(1, 24),
            ),
            (
                "2 Σ b A (c · A c) − Σ b (A c)² = Σ b A A c + Σ b A c² − Σ b A c + 1/24".to_string(),
                r(2, 1) * z.b(&z.a(&z.times(&c, &ac)))
                    - z.b(&z.times(&ac, &ac))
                    - z.b(&aac)
                    - z.b(&ac2)
                    + z.b(&ac)
                    - r(1, 24),
            ),
            (
                "Σ b c² (A c) − ⅓ Σ b A c³ = 1/12".to_string(),
                z.b(&z.times(&c2, &ac)) - r(1, 3) * z.b(&z.a(&c3)) - r(1, 12),
            ),
            ("Σ b c⁴ = 1/5".to_string(), z.b(&z.times(&c3, &c)) - r(1, 5)),
        ],
        _ => {
            return Err(Error::Domain(format!(
                "printed coefficient conditions exist for q = 3, 4, 5; got {q}"
            )))
        }
    };
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{int, rat};
    use num_traits::Zero;

    #[test]
    fn ragged_rows_and_derived_c() {
        let t = ButcherTableau::new("mid", vec![vec![], vec![rat(1, 2)]], vec![int(0), int(1)], None).unwrap();
        assert_eq!(t.c(), &[int(0), rat(1, 2)]);
        assert_eq!(t.a(0, 1), &int(0));
        assert!(t.consistency_issues().is_empty());
    }

    #[test]
    fn implicit_entries_are_rejected() {
        let err = ButcherTableau::new("bad", vec![vec![int(1)]], vec![int(1)], None).unwrap_err();
        assert!(err.to_string().contains("a11"));
    }

    #[test]
    fn weight_sum_violation_is_reported() {
        let t = ButcherTableau::new("two", vec![vec![], vec![int(1)]], vec![int(1), int(1)], None).unwrap();
        let err = validate(&Tableau::Exact(t)).unwrap_err();
        match err {
            Error::InvalidTableau { issues, .. } => {
                assert_eq!(issues.len(), 1);
                assert!(issues[0].contains("Σb = 2"), "{issues:?}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn row_sum_violation_is_reported() {
        let t = ButcherTableau::new(
            "rows",
            vec![vec![], vec![0.5]],
            vec![0.0, 1.0],
            Some(vec![0.0, 0.6]),
        )
        .unwrap();
        let err = validate(&Tableau::Float(t)).unwrap_err();
        assert!(err.to_string().contains("c2 = 0.6"), "{err}");
    }

    #[test]
    fn residual_of_midpoint_rule() {
        let r = pep_residuals(&rk22(rat(1, 2)), 3).unwrap();
        assert_eq!(r[0].1, rat(-1, 12));
        let r = pep_residuals(&rk22(rat(2, 3)), 3).unwrap();
        assert!(r[0].1.is_zero());
        assert!(pep_residuals(&rk22(rat(2, 3)), 6).is_err());
    }
}
