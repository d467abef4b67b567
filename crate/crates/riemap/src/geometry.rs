//! Coordinate charts with a metric field and optional almost complex
//! structure field, plus the local objects derived from them: Christoffel
//! symbols, Riemann curvature, sectional and holomorphic sectional curvature,
//! and the structural defect measures for almost Hermitian and Kähler charts.

use crate::error::{Error, Result};
use crate::expr::{DerivMode, ExprAst};
use crate::jet::ScalarJet2;
use crate::linalg::{max_abs, Rank3, Rank4};
use nalgebra::{DMatrix, DVector};

/// A single coordinate chart carrying a metric expression grid and an
/// optional (1,1) complex-structure expression grid.
///
/// Metric symmetry is enforced by storing only the upper triangle and
/// mirroring; positive definiteness is checked at every evaluated point.
#[derive(Debug, Clone)]
pub struct ChartManifold {
    coords: Vec<String>,
    metric_upper: Vec<ExprAst>,
    complex_structure: Option<Vec<ExprAst>>,
    domain_box: Vec<(f64, f64)>,
}

/// Christoffel symbols `gamma(k, i, j) = Γ^k_ij` at a point.
#[derive(Debug, Clone)]
pub struct ConnectionData {
    pub point: Vec<f64>,
    pub gamma: Rank3,
}

/// Riemann curvature at a point: `riem_up(l, i, j, k) = R^l_ijk` with
/// `R(∂i,∂j)∂k = R^l_ijk ∂l`, and the lowered `riem_down(i, j, k, l) =
/// g_lm R^m_ijk = g(R(∂i,∂j)∂k, ∂l)`.
#[derive(Debug, Clone)]
pub struct CurvatureData {
    pub riem_up: Rank4,
    pub riem_down: Rank4,
}

/// Metric value, inverse, and first/second coordinate derivatives at a point.
/// `dg(i, j, k) = ∂_k g_ij` and `ddg(i, j, k, l) = ∂_k ∂_l g_ij`.
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub dg: Rank3,
    pub ddg: Rank4,
}

fn upper_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    i * (2 * n + 1 - i) / 2 + (j - i)
}

impl ChartManifold {
    /// Builds a chart from expression strings. `metric` is the full n×n grid
    /// (only the upper triangle is kept), `complex_structure` the optional
    /// full grid of `J^i_j` components, `domain_box` one interval per
    /// coordinate.
    pub fn new(
        coords: Vec<String>,
        metric: &[Vec<String>],
        complex_structure: Option<&[Vec<String>]>,
        domain_box: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let n = coords.len();
        if n == 0 {
            return Err(Error::Dimension {
                context: "chart coordinates".into(),
                expected: 1,
                got: 0,
            });
        }
        for reserved in crate::expr::reserved_names() {
            if coords.iter().any(|c| c == reserved) {
                return Err(Error::UnknownIdentifier {
                    name: format!("coordinate `{reserved}` shadows a reserved name"),
                    offset: 0,
                });
            }
        }
        let grid_dim = |grid: &[Vec<String>], what: &str| -> Result<()> {
            if grid.len() != n || grid.iter().any(|row| row.len() != n) {
                return Err(Error::Dimension {
                    context: format!("{what} grid"),
                    expected: n,
                    got: grid.len(),
                });
            }
            Ok(())
        };
        grid_dim(metric, "metric")?;
        let mut metric_upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                metric_upper.push(ExprAst::parse(&metric[i][j], &coords)?);
            }
        }
        let complex_structure = match complex_structure {
            Some(grid) => {
                grid_dim(grid, "complex structure")?;
                if n % 2 != 0 {
                    return Err(Error::Dimension {
                        context: "complex structure requires even dimension".into(),
                        expected: n + 1,
                        got: n,
                    });
                }
                let mut parsed = Vec::with_capacity(n * n);
                for row in grid {
                    for entry in row {
                        parsed.push(ExprAst::parse(entry, &coords)?);
                    }
                }
                Some(parsed)
            }
            None => None,
        };
        if domain_box.len() != n {
            return Err(Error::Dimension {
                context: "domain box".into(),
                expected: n,
                got: domain_box.len(),
            });
        }
        for (lo, hi) in &domain_box {
            if !(lo < hi) {
                return Err(Error::Manifest(vec![format!(
                    "domain interval [{lo}, {hi}] is empty"
                )]));
            }
        }
        Ok(Self {
            coords,
            metric_upper,
            complex_structure,
            domain_box,
        })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn domain_box(&self) -> &[(f64, f64)] {
        &self.domain_box
    }

    pub fn has_complex_structure(&self) -> bool {
        self.complex_structure.is_some()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim()
            && p.iter()
                .zip(&self.domain_box)
                .all(|(x, (lo, hi))| *x >= *lo && *x <= *hi)
    }

    /// All expressions of the chart (metric entries, then J entries).
    pub fn expressions(&self) -> impl Iterator<Item = &ExprAst> {
        self.metric_upper
            .iter()
            .chain(self.complex_structure.iter().flatten())
    }

    fn metric_expr(&self, i: usize, j: usize) -> &ExprAst {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        &self.metric_upper[upper_index(self.dim(), a, b)]
    }

    /// Metric matrix at `p`, checked symmetric positive definite.
    pub fn metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.metric_expr(i, j).eval_value(p)?;
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        self.check_spd(&g, p)?;
        Ok(g)
    }

    /// Inverse metric at `p`; `g * g^-1` is verified to be the identity
    /// within 1e-12.
    pub fn inverse_metric_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric_at(p)?;
        self.invert_checked(&g, p)
    }

    fn check_spd(&self, g: &DMatrix<f64>, p: &[f64]) -> Result<()> {
        let eigen = g.clone().symmetric_eigen();
        let max_eig = eigen.eigenvalues.iter().fold(f64::MIN, |a, &b| a.max(b));
        let min_eig = eigen.eigenvalues.iter().fold(f64::MAX, |a, &b| a.min(b));
        if min_eig <= 1e-12 * max_eig.abs() {
            return Err(Error::NonSpdMetric {
                point: p.to_vec(),
                min_eig,
                max_eig,
            });
        }
        Ok(())
    }

    fn invert_checked(&self, g: &DMatrix<f64>, p: &[f64]) -> Result<DMatrix<f64>> {
        let chol = g.clone().cholesky().ok_or_else(|| Error::NonSpdMetric {
            point: p.to_vec(),
            min_eig: f64::NAN,
            max_eig: f64::NAN,
        })?;
        let g_inv = chol.inverse();
        let defect = max_abs(&(g * &g_inv - DMatrix::<f64>::identity(g.nrows(), g.nrows())));
        if defect > 1e-12 {
            return Err(Error::MetricInverse {
                point: p.to_vec(),
                defect,
            });
        }
        Ok(g_inv)
    }

    /// Metric with first and second derivatives at `p` in the given mode.
    pub fn metric_jets_at(&self, p: &[f64], mode: DerivMode) -> Result<MetricJets> {
        let n = self.dim();
        let mut g = DMatrix::zeros(n, n);
        let mut dg = Rank3::zeros(n);
        let mut ddg = Rank4::zeros(n);
        for i in 0..n {
            for j in i..n {
                let jet: ScalarJet2 = self.metric_expr(i, j).eval_jet_mode(p, mode)?;
                g[(i, j)] = jet.value;
                g[(j, i)] = jet.value;
                for k in 0..n {
                    dg.set(i, j, k, jet.gradient[k]);
                    dg.set(j, i, k, jet.gradient[k]);
                    for l in 0..n {
                        ddg.set(i, j, k, l, jet.hessian[(k, l)]);
                        ddg.set(j, i, k, l, jet.hessian[(k, l)]);
                    }
                }
            }
        }
        self.check_spd(&g, p)?;
        let g_inv = self.invert_checked(&g, p)?;
        Ok(MetricJets { g, g_inv, dg, ddg })
    }

    /// Levi-Civita Christoffel symbols
    /// `Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij)` at `p`.
    pub fn christoffel_at(&self, p: &[f64], mode: DerivMode) -> Result<ConnectionData> {
        let jets = self.metric_jets_at(p, mode)?;
        Ok(ConnectionData {
            point: p.to_vec(),
            gamma: christoffel_from_jets(&jets),
        })
    }

    /// Christoffel symbols together with their coordinate derivatives
    /// `dgamma(k, i, j, m) = ∂_m Γ^k_ij`.
    pub fn christoffel_with_derivs(&self, p: &[f64], mode: DerivMode) -> Result<(Rank3, Rank4)> {
        let jets = self.metric_jets_at(p, mode)?;
        Ok(christoffel_derivs_from_jets(&jets))
    }

    /// Defect of metric compatibility
    /// `∂_k g_ij − Γ^l_ki g_lj − Γ^l_kj g_il` (max absolute component).
    pub fn metric_compatibility_defect(&self, p: &[f64], mode: DerivMode) -> Result<f64> {
        let jets = self.metric_jets_at(p, mode)?;
        let gamma = christoffel_from_jets(&jets);
        let n = self.dim();
        let mut worst = 0.0f64;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut r = jets.dg.get(i, j, k);
                    for l in 0..n {
                        r -= gamma.get(l, k, i) * jets.g[(l, j)];
                        r -= gamma.get(l, k, j) * jets.g[(i, l)];
                    }
                    worst = worst.max(r.abs());
                }
            }
        }
        Ok(worst)
    }

    /// Riemann curvature with the convention
    /// `R^l_ijk = ∂_i Γ^l_jk − ∂_j Γ^l_ik + Γ^l_im Γ^m_jk − Γ^l_jm Γ^m_ik`.
    pub fn curvature_at(&self, p: &[f64], mode: DerivMode) -> Result<CurvatureData> {
        let jets = self.metric_jets_at(p, mode)?;
        let (gamma, dgamma) = christoffel_derivs_from_jets(&jets);
        let n = self.dim();
        let mut up = Rank4::zeros(n);
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        let mut r = dgamma.get(l, j, k, i) - dgamma.get(l, i, k, j);
                        for m in 0..n {
                            r += gamma.get(l, i, m) * gamma.get(m, j, k)
                                - gamma.get(l, j, m) * gamma.get(m, i, k);
                        }
                        up.set(l, i, j, k, r);
                    }
                }
            }
        }
        let mut down = Rank4::zeros(n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut r = 0.0;
                        for m in 0..n {
                            r += jets.g[(l, m)] * up.get(m, i, j, k);
                        }
                        down.set(i, j, k, l, r);
                    }
                }
            }
        }
        Ok(CurvatureData {
            riem_up: up,
            riem_down: down,
        })
    }

    /// Sectional curvature of the plane spanned by `x` and `y`:
    /// `g(R(X,Y)Y,X) / (‖X‖²‖Y‖² − g(X,Y)²)`.
    pub fn sectional_curvature(
        &self,
        p: &[f64],
        x: &DVector<f64>,
        y: &DVector<f64>,
        mode: DerivMode,
    ) -> Result<f64> {
        let g = self.metric_at(p)?;
        let curv = self.curvature_at(p, mode)?;
        let num = contract_riemann(&curv.riem_down, x, y, y, x);
        let xx = (&g * x).dot(x);
        let yy = (&g * y).dot(y);
        let xy = (&g * y).dot(x);
        let denom = xx * yy - xy * xy;
        if denom.abs() < 1e-14 {
            return Err(Error::ZeroVector {
                operation: "sectional_curvature (degenerate plane)".into(),
            });
        }
        Ok(num / denom)
    }

    /// Complex-structure matrix `J^i_j` at `p`.
    pub fn complex_structure_at(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let grid = self
            .complex_structure
            .as_ref()
            .ok_or_else(|| Error::MissingComplexStructure {
                operation: "complex_structure_at".into(),
            })?;
        let mut j = DMatrix::zeros(n, n);
        for r in 0..n {
            for c in 0..n {
                j[(r, c)] = grid[r * n + c].eval_value(p)?;
            }
        }
        Ok(j)
    }

    /// Holomorphic sectional curvature `H(X) = g(R(X,JX)JX,X) / ‖X‖⁴`.
    pub fn holomorphic_sectional_curvature(
        &self,
        p: &[f64],
        x: &DVector<f64>,
        mode: DerivMode,
    ) -> Result<f64> {
        let j = self.complex_structure_at(p)?;
        let g = self.metric_at(p)?;
        let norm2 = (&g * x).dot(x);
        if norm2 <= 0.0 || x.iter().all(|&c| c == 0.0) {
            return Err(Error::ZeroVector {
                operation: "holomorphic_sectional_curvature".into(),
            });
        }
        let jx = &j * x;
        let curv = self.curvature_at(p, mode)?;
        Ok(contract_riemann(&curv.riem_down, x, &jx, &jx, x) / (norm2 * norm2))
    }

    /// Almost Hermitian defects at `p`: `(‖J²+I‖_max, ‖JᵀgJ − g‖_max)`.
    pub fn validate_almost_hermitian(&self, p: &[f64]) -> Result<(f64, f64)> {
        let j = self.complex_structure_at(p)?;
        let g = self.metric_at(p)?;
        let n = self.dim();
        let defect_j2 = max_abs(&(&j * &j + DMatrix::<f64>::identity(n, n)));
        let defect_compat = max_abs(&(j.transpose() * &g * &j - &g));
        Ok((defect_j2, defect_compat))
    }

    /// Kähler defect: max over components of the covariant derivative of J,
    /// `(∇_i J)^k_j = ∂_i J^k_j + Γ^k_il J^l_j − Γ^l_ij J^k_l`.
    pub fn kahler_defect(&self, p: &[f64], mode: DerivMode) -> Result<f64> {
        Ok(self.kahler_defect_terms(p, mode)?.0)
    }

    /// Kähler defect together with the largest magnitude of the individual
    /// terms entering it (the scale used for relative tolerances).
    pub fn kahler_defect_terms(&self, p: &[f64], mode: DerivMode) -> Result<(f64, f64)> {
        let n = self.dim();
        let grid = self
            .complex_structure
            .as_ref()
            .ok_or_else(|| Error::MissingComplexStructure {
                operation: "kahler_defect".into(),
            })?;
        let mut j = DMatrix::zeros(n, n);
        let mut dj = Rank3::zeros(n); // dj(k, j, i) = ∂_i J^k_j
        for r in 0..n {
            for c in 0..n {
                let jet = grid[r * n + c].eval_jet_mode(p, mode)?;
                j[(r, c)] = jet.value;
                for i in 0..n {
                    dj.set(r, c, i, jet.gradient[i]);
                }
            }
        }
        let conn = self.christoffel_at(p, mode)?;
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for i in 0..n {
            for jj in 0..n {
                for k in 0..n {
                    let d = dj.get(k, jj, i);
                    let mut up = 0.0;
                    let mut down = 0.0;
                    for l in 0..n {
                        up += conn.gamma.get(k, i, l) * j[(l, jj)];
                        down += conn.gamma.get(l, i, jj) * j[(k, l)];
                    }
                    worst = worst.max((d + up - down).abs());
                    scale = scale.max(d.abs()).max(up.abs()).max(down.abs());
                }
            }
        }
        Ok((worst, scale))
    }
}

fn christoffel_from_jets(jets: &MetricJets) -> Rank3 {
    let n = jets.g.nrows();
    let mut gamma = Rank3::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                let mut sum = 0.0;
                for l in 0..n {
                    sum += 0.5
                        * jets.g_inv[(k, l)]
                        * (jets.dg.get(j, l, i) + jets.dg.get(i, l, j) - jets.dg.get(i, j, l));
                }
                gamma.set(k, i, j, sum);
                gamma.set(k, j, i, sum);
            }
        }
    }
    gamma
}

fn christoffel_derivs_from_jets(jets: &MetricJets) -> (Rank3, Rank4) {
    let n = jets.g.nrows();
    let gamma = christoffel_from_jets(jets);

    // ∂_m g^{kl} = -g^{ka} (∂_m g_ab) g^{bl}
    let mut dg_inv = Rank3::zeros(n);
    for m in 0..n {
        for k in 0..n {
            for l in 0..n {
                let mut sum = 0.0;
                for a in 0..n {
                    for b in 0..n {
                        sum -= jets.g_inv[(k, a)] * jets.dg.get(a, b, m) * jets.g_inv[(b, l)];
                    }
                }
                dg_inv.set(k, l, m, sum);
            }
        }
    }

    let mut dgamma = Rank4::zeros(n);
    for k in 0..n {
        for i in 0..n {
            for j in i..n {
                for m in 0..n {
                    let mut sum = 0.0;
                    for l in 0..n {
                        let bracket =
                            jets.dg.get(j, l, i) + jets.dg.get(i, l, j) - jets.dg.get(i, j, l);
                        let dbracket = jets.ddg.get(j, l, i, m) + jets.ddg.get(i, l, j, m)
                            - jets.ddg.get(i, j, l, m);
                        sum += 0.5
                            * (dg_inv.get(k, l, m) * bracket + jets.g_inv[(k, l)] * dbracket);
                    }
                    dgamma.set(k, i, j, m, sum);
                    dgamma.set(k, j, i, m, sum);
                }
            }
        }
    }
    (gamma, dgamma)
}

/// Contracts the lowered curvature with four vectors:
/// `R(X,Y,Z,W) = R_ijkl X^i Y^j Z^k W^l = g(R(X,Y)Z, W)`.
pub fn contract_riemann(
    down: &Rank4,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
    w: &DVector<f64>,
) -> f64 {
    let n = down.dim();
    let mut sum = 0.0;
    for i in 0..n {
        if x[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            if y[j] == 0.0 {
                continue;
            }
            for k in 0..n {
                for l in 0..n {
                    sum += down.get(i, j, k, l) * x[i] * y[j] * z[k] * w[l];
                }
            }
        }
    }
    sum
}
