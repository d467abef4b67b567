//! Smooth maps between chart manifolds and the calculus built on their
//! differential: the four-way tangent splitting, Riemannian and holomorphy
//! defects, the second fundamental form, the tension field, the shape
//! operator with its normal connection, mean curvature of the range, and
//! involutivity defects for the kernel and horizontal distributions.

use crate::error::{Error, Result};
use crate::expr::{DerivMode, ExprAst};
use crate::geometry::ChartManifold;
use crate::jet::ScalarJet2;
use crate::linalg::{gram_schmidt, metric_dot, metric_norm, project_onto_frame};
use nalgebra::{DMatrix, DVector};

/// Default relative threshold on singular values for rank detection.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// Step used for the central-difference Lie brackets of projector fields.
pub const INVOLUTIVITY_FD_STEP: f64 = 1e-5;

/// A smooth map given by one target-component expression per target
/// coordinate, all over the source coordinates.
#[derive(Debug, Clone)]
pub struct SmoothMap {
    source: ChartManifold,
    target: ChartManifold,
    components: Vec<ExprAst>,
}

/// Jacobian `∂_i F^α` (rows α, columns i) and per-component Hessians at a point.
#[derive(Debug, Clone)]
pub struct MapHessianData {
    pub jacobian: DMatrix<f64>,
    pub hessians: Vec<DMatrix<f64>>,
}

/// Metric-orthonormal frames for the four-way splitting
/// `TM1 = ker F_* ⊕ (ker F_*)^⊥` and `TM2 = range F_* ⊕ (range F_*)^⊥`
/// at a single point.
#[derive(Debug, Clone)]
pub struct TangentSplit {
    pub point: Vec<f64>,
    pub target_point: Vec<f64>,
    pub rank: usize,
    pub singular_values: Vec<f64>,
    /// g1-orthonormal frame of `ker F_*` (length m1 − rank).
    pub ker_frame: Vec<DVector<f64>>,
    /// g1-orthonormal frame of `(ker F_*)^⊥` (length rank).
    pub hor_frame: Vec<DVector<f64>>,
    /// g2-orthonormal frame of `range F_*` at F(p) (length rank).
    pub range_frame: Vec<DVector<f64>>,
    /// g2-orthonormal frame of `(range F_*)^⊥` at F(p) (length m2 − rank).
    pub normal_frame: Vec<DVector<f64>>,
}

/// Shape-operator data for a normal field V along a horizontal frame:
/// `s_matrix[(b, a)] = g2(S_V F_* e_a, F_* e_b)` and per-direction normal
/// derivatives `∇^{F⊥}_{e_a} V`.
#[derive(Debug, Clone)]
pub struct ShapeOperatorData {
    pub s_matrix: DMatrix<f64>,
    pub normal_derivs: Vec<DVector<f64>>,
}

impl SmoothMap {
    pub fn new(
        source: ChartManifold,
        target: ChartManifold,
        components: &[String],
    ) -> Result<Self> {
        if components.len() != target.dim() {
            return Err(Error::Dimension {
                context: "map components".into(),
                expected: target.dim(),
                got: components.len(),
            });
        }
        let parsed = components
            .iter()
            .map(|c| ExprAst::parse(c, source.coords()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source,
            target,
            components: parsed,
        })
    }

    pub fn source(&self) -> &ChartManifold {
        &self.source
    }

    pub fn target(&self) -> &ChartManifold {
        &self.target
    }

    pub fn components(&self) -> &[ExprAst] {
        &self.components
    }

    /// F(p).
    pub fn eval(&self, p: &[f64]) -> Result<Vec<f64>> {
        self.components.iter().map(|c| c.eval_value(p)).collect()
    }

    /// Jacobian and component Hessians at `p`.
    pub fn differential_at(&self, p: &[f64], mode: DerivMode) -> Result<MapHessianData> {
        let m1 = self.source.dim();
        let m2 = self.target.dim();
        let mut jacobian = DMatrix::zeros(m2, m1);
        let mut hessians = Vec::with_capacity(m2);
        for (alpha, comp) in self.components.iter().enumerate() {
            let jet: ScalarJet2 = comp.eval_jet_mode(p, mode)?;
            for i in 0..m1 {
                jacobian[(alpha, i)] = jet.gradient[i];
            }
            hessians.push(jet.hessian);
        }
        Ok(MapHessianData { jacobian, hessians })
    }

    /// Builds the four metric-orthonormal frames at `p`.
    ///
    /// The numeric rank is the number of singular values of the (Euclidean)
    /// Jacobian above `rank_tol · σ_max`; singular values within a factor 10
    /// of that threshold raise a diagnostic error instead of silently
    /// choosing a rank.
    pub fn tangent_split_at(
        &self,
        p: &[f64],
        rank_tol: f64,
        mode: DerivMode,
    ) -> Result<TangentSplit> {
        let m1 = self.source.dim();
        let m2 = self.target.dim();
        let diff = self.differential_at(p, mode)?;
        let a = &diff.jacobian;
        let target_point = self.eval(p)?;
        let g1 = self.source.metric_at(p)?;
        let g2 = self.target.metric_at(&target_point)?;

        let svd = a.clone().svd(false, true);
        let mut sigmas: Vec<f64> = svd.singular_values.iter().copied().collect();
        sigmas.sort_by(|x, y| y.total_cmp(x));
        let sigma_max = sigmas.first().copied().unwrap_or(0.0);
        let rank = if sigma_max == 0.0 {
            0
        } else {
            let threshold = rank_tol * sigma_max;
            for &s in &sigmas {
                if s > threshold / 10.0 && s < threshold * 10.0 {
                    return Err(Error::RankAmbiguous {
                        point: p.to_vec(),
                        sigmas: sigmas.clone(),
                        threshold,
                    });
                }
            }
            sigmas.iter().filter(|&&s| s > threshold).count()
        };

        // Euclidean row-space basis: leading right-singular vectors.
        let v_t = svd.v_t.as_ref().expect("svd computed with v");
        let mut row_space = Vec::with_capacity(rank);
        let order = {
            // v_t rows follow svd.singular_values order, which may be unsorted
            let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
            idx.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
            idx
        };
        for &row in order.iter().take(rank) {
            row_space.push(v_t.row(row).transpose());
        }

        // Euclidean kernel basis: complete the row space to a full basis.
        let euclid = DMatrix::<f64>::identity(m1, m1);
        let std_basis: Vec<DVector<f64>> = (0..m1).map(|i| euclid.column(i).into()).collect();
        let ker_euclid = gram_schmidt(&euclid, &row_space, &std_basis, m1 - rank)?;

        let ker_frame = gram_schmidt(&g1, &[], &ker_euclid, m1 - rank)?;
        let hor_frame = gram_schmidt(&g1, &ker_frame, &row_space, rank)?;
        let pushed: Vec<DVector<f64>> = hor_frame.iter().map(|e| a * e).collect();
        let range_frame = gram_schmidt(&g2, &[], &pushed, rank)?;
        let target_std: Vec<DVector<f64>> = {
            let id = DMatrix::<f64>::identity(m2, m2);
            (0..m2).map(|i| id.column(i).into()).collect()
        };
        let normal_frame = gram_schmidt(&g2, &range_frame, &target_std, m2 - rank)?;

        Ok(TangentSplit {
            point: p.to_vec(),
            target_point,
            rank,
            singular_values: sigmas,
            ker_frame,
            hor_frame,
            range_frame,
            normal_frame,
        })
    }

    /// `max_{a,b} |g2(F_* e_a, F_* e_b) − g1(e_a, e_b)|` over the horizontal
    /// frame; zero exactly when F is a Riemannian map at `p`.
    pub fn riemannian_defect_at(&self, p: &[f64], mode: DerivMode) -> Result<f64> {
        let split = self.tangent_split_at(p, DEFAULT_RANK_TOL, mode)?;
        self.riemannian_defect_with_split(&split, mode)
    }

    pub fn riemannian_defect_with_split(
        &self,
        split: &TangentSplit,
        mode: DerivMode,
    ) -> Result<f64> {
        let diff = self.differential_at(&split.point, mode)?;
        let g1 = self.source.metric_at(&split.point)?;
        let g2 = self.target.metric_at(&split.target_point)?;
        let mut worst = 0.0f64;
        for ea in &split.hor_frame {
            let fa = &diff.jacobian * ea;
            for eb in &split.hor_frame {
                let fb = &diff.jacobian * eb;
                let d = (metric_dot(&g2, &fa, &fb) - metric_dot(&g1, ea, eb)).abs();
                worst = worst.max(d);
            }
        }
        Ok(worst)
    }

    /// `‖J2(F(p)) A − A J1(p)‖_max` where A is the Jacobian.
    pub fn holomorphy_defect_at(&self, p: &[f64], mode: DerivMode) -> Result<f64> {
        let diff = self.differential_at(p, mode)?;
        let fp = self.eval(p)?;
        let j1 = self.source.complex_structure_at(p)?;
        let j2 = self.target.complex_structure_at(&fp)?;
        let defect = &j2 * &diff.jacobian - &diff.jacobian * &j1;
        Ok(crate::linalg::max_abs(&defect))
    }

    /// Coordinate tensor of the second fundamental form at `p`:
    /// `T^α_ij = ∂_i∂_j F^α + (Γ²)^α_βγ ∂_i F^β ∂_j F^γ − (Γ¹)^k_ij ∂_k F^α`,
    /// one symmetric m1×m1 slice per target component α.
    pub fn sff_tensor_at(&self, p: &[f64], mode: DerivMode) -> Result<Vec<DMatrix<f64>>> {
        let m1 = self.source.dim();
        let m2 = self.target.dim();
        let diff = self.differential_at(p, mode)?;
        let fp = self.eval(p)?;
        let gamma1 = self.source.christoffel_at(p, mode)?.gamma;
        let gamma2 = self.target.christoffel_at(&fp, mode)?.gamma;

        let mut slices = Vec::with_capacity(m2);
        for alpha in 0..m2 {
            let mut t = DMatrix::zeros(m1, m1);
            for i in 0..m1 {
                for j in i..m1 {
                    let mut v = diff.hessians[alpha][(i, j)];
                    for beta in 0..m2 {
                        for gamma in 0..m2 {
                            v += gamma2.get(alpha, beta, gamma)
                                * diff.jacobian[(beta, i)]
                                * diff.jacobian[(gamma, j)];
                        }
                    }
                    for k in 0..m1 {
                        v -= gamma1.get(k, i, j) * diff.jacobian[(alpha, k)];
                    }
                    t[(i, j)] = v;
                    t[(j, i)] = v;
                }
            }
            slices.push(t);
        }
        Ok(slices)
    }

    /// `(∇F_*)(X, Y)` at `p`: a tangent vector at F(p), exactly symmetric
    /// and bilinear in (X, Y).
    pub fn second_fund_form_at(
        &self,
        p: &[f64],
        x: &DVector<f64>,
        y: &DVector<f64>,
        mode: DerivMode,
    ) -> Result<DVector<f64>> {
        let tensor = self.sff_tensor_at(p, mode)?;
        Ok(contract_sff(&tensor, x, y))
    }

    /// Tension field split `(τ, τ¹, τ²)` at `p`: traces of `∇F_*` over the
    /// kernel frame (τ¹) and horizontal frame (τ²).
    pub fn tension_at(
        &self,
        p: &[f64],
        mode: DerivMode,
    ) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let split = self.tangent_split_at(p, DEFAULT_RANK_TOL, mode)?;
        self.tension_with_split(&split, mode)
    }

    pub fn tension_with_split(
        &self,
        split: &TangentSplit,
        mode: DerivMode,
    ) -> Result<(DVector<f64>, DVector<f64>, DVector<f64>)> {
        let tensor = self.sff_tensor_at(&split.point, mode)?;
        let m2 = self.target.dim();
        let mut tau1 = DVector::zeros(m2);
        for e in &split.ker_frame {
            tau1 += contract_sff(&tensor, e, e);
        }
        let mut tau2 = DVector::zeros(m2);
        for e in &split.hor_frame {
            tau2 += contract_sff(&tensor, e, e);
        }
        let tau = &tau1 + &tau2;
        Ok((tau, tau1, tau2))
    }

    /// Mean curvature vector of `range F_*`:
    /// `H = (1/r) Σ_a (∇F_*)(e_a, e_a)` over the horizontal frame.
    pub fn mean_curvature_range_at(&self, p: &[f64], mode: DerivMode) -> Result<DVector<f64>> {
        let split = self.tangent_split_at(p, DEFAULT_RANK_TOL, mode)?;
        self.mean_curvature_with_split(&split, mode)
    }

    pub fn mean_curvature_with_split(
        &self,
        split: &TangentSplit,
        mode: DerivMode,
    ) -> Result<DVector<f64>> {
        if split.rank == 0 {
            return Err(Error::ZeroVector {
                operation: "mean_curvature_range_at (rank 0)".into(),
            });
        }
        let (_, _, tau2) = self.tension_with_split(split, mode)?;
        Ok(tau2 / split.rank as f64)
    }

    /// Shape operator of a normal field `v_field` (expressions over target
    /// coordinates, restricted along F) and its normal-connection
    /// derivatives, both resolved against the split frames.
    ///
    /// For each horizontal frame vector e_a the pullback derivative
    /// `D_a = ∂_{e_a}(V∘F) + Γ²(F_* e_a) V` decomposes as
    /// `D_a = −S_V F_* e_a + ∇^{F⊥}_{e_a} V`.
    pub fn shape_operator_at(
        &self,
        p: &[f64],
        v_field: &[ExprAst],
        mode: DerivMode,
    ) -> Result<ShapeOperatorData> {
        let split = self.tangent_split_at(p, DEFAULT_RANK_TOL, mode)?;
        self.shape_operator_with_split(&split, v_field, mode)
    }

    pub fn shape_operator_with_split(
        &self,
        split: &TangentSplit,
        v_field: &[ExprAst],
        mode: DerivMode,
    ) -> Result<ShapeOperatorData> {
        let m2 = self.target.dim();
        if v_field.len() != m2 {
            return Err(Error::Dimension {
                context: "normal field components".into(),
                expected: m2,
                got: v_field.len(),
            });
        }
        let p = &split.point;
        let fp = &split.target_point;
        let diff = self.differential_at(p, mode)?;
        let g2 = self.target.metric_at(fp)?;
        let gamma2 = self.target.christoffel_at(fp, mode)?.gamma;

        let mut v = DVector::zeros(m2);
        let mut dv = DMatrix::zeros(m2, m2); // dv[(alpha, beta)] = ∂_β V^α
        for (alpha, comp) in v_field.iter().enumerate() {
            let jet = comp.eval_jet_mode(fp, mode)?;
            v[alpha] = jet.value;
            for beta in 0..m2 {
                dv[(alpha, beta)] = jet.gradient[beta];
            }
        }

        let tangency = metric_norm(&g2, &project_onto_frame(&g2, &split.range_frame, &v));
        let limit = 1e-8 * metric_norm(&g2, &v).max(1.0);
        if tangency > limit {
            return Err(Error::NotNormal {
                point: p.clone(),
                tangency,
                limit,
            });
        }

        let r = split.rank;
        let mut s_matrix = DMatrix::zeros(r, r);
        let mut normal_derivs = Vec::with_capacity(r);
        let pushed: Vec<DVector<f64>> = split.hor_frame.iter().map(|e| &diff.jacobian * e).collect();
        for (a, w) in pushed.iter().enumerate() {
            let mut d = DVector::zeros(m2);
            for alpha in 0..m2 {
                let mut val = 0.0;
                for beta in 0..m2 {
                    val += dv[(alpha, beta)] * w[beta];
                    for gamma in 0..m2 {
                        val += gamma2.get(alpha, beta, gamma) * w[beta] * v[gamma];
                    }
                }
                d[alpha] = val;
            }
            for (b, fb) in pushed.iter().enumerate() {
                s_matrix[(b, a)] = -metric_dot(&g2, &d, fb);
            }
            normal_derivs.push(project_onto_frame(&g2, &split.normal_frame, &d));
        }
        Ok(ShapeOperatorData {
            s_matrix,
            normal_derivs,
        })
    }

    /// g1-orthogonal projector onto `ker F_*` at `p`, plus the numeric rank.
    pub fn kernel_projector_at(
        &self,
        p: &[f64],
        rank_tol: f64,
        mode: DerivMode,
    ) -> Result<(DMatrix<f64>, usize)> {
        let split = self.tangent_split_at(p, rank_tol, mode)?;
        let g1 = self.source.metric_at(p)?;
        let m1 = self.source.dim();
        let mut p_hor = DMatrix::zeros(m1, m1);
        for h in &split.hor_frame {
            p_hor += h * (&g1 * h).transpose();
        }
        Ok((DMatrix::identity(m1, m1) - p_hor, split.rank))
    }

    /// Involutivity defect of the kernel distribution:
    /// `max_{i<j} ‖(I − P)[P∂_i, P∂_j]‖` with P the kernel projector field
    /// and brackets from central differences of P.
    pub fn kernel_involutivity_defect_at(&self, p: &[f64], rank_tol: f64, mode: DerivMode) -> Result<f64> {
        self.involutivity_defect(p, rank_tol, mode, true)
    }

    /// Involutivity defect of the horizontal distribution `(ker F_*)^⊥`.
    pub fn horizontal_involutivity_defect_at(
        &self,
        p: &[f64],
        rank_tol: f64,
        mode: DerivMode,
    ) -> Result<f64> {
        self.involutivity_defect(p, rank_tol, mode, false)
    }

    fn involutivity_defect(
        &self,
        p: &[f64],
        rank_tol: f64,
        mode: DerivMode,
        kernel_side: bool,
    ) -> Result<f64> {
        let m1 = self.source.dim();
        let (p_ker, rank0) = self.kernel_projector_at(p, rank_tol, mode)?;
        let dist = |pk: DMatrix<f64>| -> DMatrix<f64> {
            if kernel_side {
                pk
            } else {
                DMatrix::identity(m1, m1) - pk
            }
        };
        let p0 = dist(p_ker);
        let h = INVOLUTIVITY_FD_STEP;
        let mut dp = Vec::with_capacity(m1);
        let mut shifted = p.to_vec();
        for l in 0..m1 {
            shifted.copy_from_slice(p);
            shifted[l] += h;
            let (pp, rank_p) = self.kernel_projector_at(&shifted, rank_tol, mode)?;
            shifted[l] -= 2.0 * h;
            let (pm, rank_m) = self.kernel_projector_at(&shifted, rank_tol, mode)?;
            for (got, at) in [(rank_p, 1.0), (rank_m, -1.0)] {
                if got != rank0 {
                    let mut q = p.to_vec();
                    q[l] += at * h;
                    return Err(Error::RankChanged {
                        point: q,
                        expected: rank0,
                        got,
                    });
                }
            }
            dp.push((dist(pp) - dist(pm)) / (2.0 * h));
        }
        let complement = DMatrix::<f64>::identity(m1, m1) - &p0;
        let mut worst = 0.0f64;
        for i in 0..m1 {
            let ui = p0.column(i);
            for j in (i + 1)..m1 {
                let uj = p0.column(j);
                let mut bracket = DVector::zeros(m1);
                for k in 0..m1 {
                    let mut v = 0.0;
                    for l in 0..m1 {
                        v += ui[l] * dp[l][(k, j)] - uj[l] * dp[l][(k, i)];
                    }
                    bracket[k] = v;
                }
                worst = worst.max((&complement * bracket).norm());
            }
        }
        Ok(worst)
    }
}

/// Contracts a symmetric second-fundamental-form tensor with two vectors.
/// The pairing `T_ij X^i Y^j` is accumulated so that swapping X and Y gives
/// a bit-identical result.
fn contract_sff(tensor: &[DMatrix<f64>], x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
    let m2 = tensor.len();
    let m1 = x.len();
    let mut out = DVector::zeros(m2);
    for (alpha, t) in tensor.iter().enumerate() {
        let mut sum = 0.0;
        for i in 0..m1 {
            sum += t[(i, i)] * (x[i] * y[i]);
            for j in (i + 1)..m1 {
                sum += t[(i, j)] * (x[i] * y[j] + x[j] * y[i]);
            }
        }
        out[alpha] = sum;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn grid(entries: &[&[&str]]) -> Vec<Vec<String>> {
        entries
            .iter()
            .map(|row| row.iter().map(|s| s.to_string()).collect())
            .collect()
    }

    fn strings(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    fn standard_j4() -> Vec<Vec<String>> {
        grid(&[
            &["0", "-1", "0", "0"],
            &["1", "0", "0", "0"],
            &["0", "0", "0", "-1"],
            &["0", "0", "1", "0"],
        ])
    }

    fn standard_j2() -> Vec<Vec<String>> {
        grid(&[&["0", "-1"], &["1", "0"]])
    }

    fn flat(coords: &[&str], j: Option<&[Vec<String>]>, half_width: f64) -> ChartManifold {
        let n = coords.len();
        let metric: Vec<Vec<String>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { "1".to_string() } else { "0".to_string() })
                    .collect()
            })
            .collect();
        ChartManifold::new(
            names(coords),
            &metric,
            j,
            vec![(-half_width, half_width); n],
        )
        .unwrap()
    }

    /// The R^4 → R^4 holomorphic Riemannian map with kernel and normal parts.
    fn paper_map() -> SmoothMap {
        let source = flat(&["x1", "x2", "x3", "x4"], Some(&standard_j4()), 2.0);
        let target = flat(&["y1", "y2", "y3", "y4"], Some(&standard_j4()), 4.0);
        SmoothMap::new(
            source,
            target,
            &strings(&[
                "(x1 + x3)/sqrt(2)",
                "(x2 + x4)/sqrt(2)",
                "0",
                "0",
            ]),
        )
        .unwrap()
    }

    /// (x,y,u,v) ↦ (x, y, x²−y², 2xy) with the pullback source metric.
    fn graph_with_kernel() -> SmoothMap {
        let lambda = "1 + 4*(x^2 + y^2)";
        let source = ChartManifold::new(
            names(&["x", "y", "u", "v"]),
            &grid(&[
                &[lambda, "0", "0", "0"],
                &["0", lambda, "0", "0"],
                &["0", "0", "1", "0"],
                &["0", "0", "0", "1"],
            ]),
            Some(&standard_j4()),
            vec![(-1.0, 1.0); 4],
        )
        .unwrap();
        let target = flat(&["z1", "z2", "z3", "z4"], Some(&standard_j4()), 4.0);
        SmoothMap::new(
            source,
            target,
            &strings(&["x", "y", "x^2 - y^2", "2*x*y"]),
        )
        .unwrap()
    }

    fn identity_r4() -> SmoothMap {
        let source = flat(&["x1", "x2", "x3", "x4"], None, 2.0);
        let target = flat(&["y1", "y2", "y3", "y4"], None, 4.0);
        SmoothMap::new(source, target, &strings(&["x1", "x2", "x3", "x4"])).unwrap()
    }

    /// z ↦ z² on flat C (non-Riemannian away from |z| = 1).
    fn squaring_map() -> SmoothMap {
        let source = flat(&["x", "y"], Some(&standard_j2()), 3.0);
        let target = flat(&["w1", "w2"], Some(&standard_j2()), 20.0);
        SmoothMap::new(source, target, &strings(&["x^2 - y^2", "2*x*y"])).unwrap()
    }

    /// Real parabola graph x ↦ (x, x², 0) with pullback metric: not minimal.
    fn parabola_map() -> SmoothMap {
        let source = ChartManifold::new(
            names(&["x", "u"]),
            &grid(&[&["1 + 4*x^2", "0"], &["0", "1"]]),
            None,
            vec![(-1.0, 1.0); 2],
        )
        .unwrap();
        let target = flat(&["z1", "z2", "z3"], None, 4.0);
        SmoothMap::new(source, target, &strings(&["x", "x^2", "0"])).unwrap()
    }

    fn e(n: usize, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v
    }

    fn spans_same(frame: &[DVector<f64>], generators: &[DVector<f64>]) -> bool {
        // every generator must lie in the Euclidean span of the frame
        generators.iter().all(|g| {
            let mut residual = g.clone();
            let gram: Vec<f64> = frame.iter().map(|f| f.dot(g) / f.dot(f)).collect();
            for (f, c) in frame.iter().zip(gram) {
                residual -= f * c;
            }
            residual.norm() < 1e-10 * g.norm().max(1.0)
        })
    }

    #[test]
    fn paper_map_differential_is_constant() {
        let f = paper_map();
        let inv_sqrt2 = 1.0 / 2f64.sqrt();
        for p in [[0.0; 4], [0.5, -0.5, 1.0, 0.25]] {
            let d = f.differential_at(&p, DerivMode::Jets).unwrap();
            assert!((d.jacobian[(0, 0)] - inv_sqrt2).abs() < 1e-16);
            assert!((d.jacobian[(0, 2)] - inv_sqrt2).abs() < 1e-16);
            assert!((d.jacobian[(1, 1)] - inv_sqrt2).abs() < 1e-16);
            assert!((d.jacobian[(1, 3)] - inv_sqrt2).abs() < 1e-16);
            assert_eq!(d.jacobian.row(2).iter().map(|v| v.abs()).sum::<f64>(), 0.0);
            assert_eq!(d.jacobian.row(3).iter().map(|v| v.abs()).sum::<f64>(), 0.0);
            assert!(d.hessians.iter().all(|h| h.iter().all(|&v| v == 0.0)));
        }
    }

    #[test]
    fn identity_differential() {
        let f = identity_r4();
        let d = f.differential_at(&[0.1, 0.2, 0.3, 0.4], DerivMode::Jets).unwrap();
        assert_eq!(d.jacobian, DMatrix::identity(4, 4));
        assert!(d.hessians.iter().all(|h| h.iter().all(|&v| v == 0.0)));
    }

    #[test]
    fn graph_hessian_rows() {
        let f = graph_with_kernel();
        let d = f.differential_at(&[1.0, 0.0, 0.0, 0.0], DerivMode::Jets).unwrap();
        assert_eq!(d.hessians[2][(0, 0)], 2.0);
        assert_eq!(d.hessians[2][(1, 1)], -2.0);
        assert_eq!(d.hessians[2][(0, 1)], 0.0);
        assert_eq!(d.hessians[3][(0, 1)], 2.0);
        assert_eq!(d.hessians[3][(0, 0)], 0.0);
    }

    #[test]
    fn paper_map_split() {
        let f = paper_map();
        let s = f
            .tangent_split_at(&[0.2, -0.1, 0.6, 0.9], DEFAULT_RANK_TOL, DerivMode::Jets)
            .unwrap();
        assert_eq!(s.rank, 2);
        assert_eq!(s.ker_frame.len(), 2);
        assert_eq!(s.normal_frame.len(), 2);
        let ker_gen = vec![
            DVector::from_row_slice(&[1.0, 0.0, -1.0, 0.0]),
            DVector::from_row_slice(&[0.0, 1.0, 0.0, -1.0]),
        ];
        assert!(spans_same(&s.ker_frame, &ker_gen));
        let normal_gen = vec![e(4, 2), e(4, 3)];
        assert!(spans_same(&s.normal_frame, &normal_gen));
        // σ = {1, 1, 0, 0}
        assert!((s.singular_values[0] - 1.0).abs() < 1e-14);
        assert!((s.singular_values[1] - 1.0).abs() < 1e-14);
        assert!(s.singular_values[2].abs() < 1e-14);
    }

    #[test]
    fn identity_split_has_empty_ker_and_normal() {
        let f = identity_r4();
        let s = f
            .tangent_split_at(&[0.0; 4], DEFAULT_RANK_TOL, DerivMode::Jets)
            .unwrap();
        assert_eq!(s.rank, 4);
        assert!(s.ker_frame.is_empty());
        assert!(s.normal_frame.is_empty());
    }

    #[test]
    fn graph_split_at_origin() {
        let f = graph_with_kernel();
        let s = f
            .tangent_split_at(&[0.0; 4], DEFAULT_RANK_TOL, DerivMode::Jets)
            .unwrap();
        assert_eq!(s.rank, 2);
        assert!(spans_same(&s.ker_frame, &[e(4, 2), e(4, 3)]));
        assert!(spans_same(&s.range_frame, &[e(4, 0), e(4, 1)]));
    }

    #[test]
    fn split_frames_are_orthonormal() {
        let f = graph_with_kernel();
        let p = [0.4, -0.3, 0.2, 0.7];
        let s = f.tangent_split_at(&p, DEFAULT_RANK_TOL, DerivMode::Jets).unwrap();
        let g1 = f.source().metric_at(&p).unwrap();
        let g2 = f.target().metric_at(&s.target_point).unwrap();
        let d = f.differential_at(&p, DerivMode::Jets).unwrap();
        for (i, a) in s.ker_frame.iter().enumerate() {
            // F_* kills the kernel frame
            assert!((&d.jacobian * a).norm() < 1e-12);
            for (j, b) in s.ker_frame.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((metric_dot(&g1, a, b) - expect).abs() < 1e-10);
            }
            for h in &s.hor_frame {
                assert!(metric_dot(&g1, a, h).abs() < 1e-10);
            }
        }
        for (i, a) in s.range_frame.iter().enumerate() {
            for (j, b) in s.range_frame.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((metric_dot(&g2, a, b) - expect).abs() < 1e-10);
            }
            for n in &s.normal_frame {
                assert!(metric_dot(&g2, a, n).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn riemannian_defects() {
        let f = paper_map();
        assert!(f.riemannian_defect_at(&[0.3, 0.1, -0.5, 0.9], DerivMode::Jets).unwrap() < 1e-15);

        let g = graph_with_kernel();
        assert!(g.riemannian_defect_at(&[0.6, -0.8, 0.1, 0.3], DerivMode::Jets).unwrap() < 1e-12);

        // z ↦ z² at z = (1, 0): g2(F_*X, F_*X) = 4 against g1(X, X) = 1
        let sq = squaring_map();
        let d = sq.riemannian_defect_at(&[1.0, 0.0], DerivMode::Jets).unwrap();
        assert!((d - 3.0).abs() < 1e-12, "defect {d}");
    }

    #[test]
    fn holomorphy_defects() {
        let f = paper_map();
        assert_eq!(f.holomorphy_defect_at(&[0.2, 0.4, -0.1, 0.0], DerivMode::Jets).unwrap(), 0.0);

        let g = graph_with_kernel();
        assert!(g.holomorphy_defect_at(&[0.5, 0.5, 0.2, -0.2], DerivMode::Jets).unwrap() < 1e-12);

        // conjugation (x, y) ↦ (x, −y) has J2 F_* = −F_* J1
        let source = flat(&["x", "y"], Some(&standard_j2()), 2.0);
        let target = flat(&["w1", "w2"], Some(&standard_j2()), 2.0);
        let conj = SmoothMap::new(source, target, &strings(&["x", "-y"])).unwrap();
        let d = conj.holomorphy_defect_at(&[0.7, -0.4], DerivMode::Jets).unwrap();
        assert_eq!(d, 2.0);
    }

    #[test]
    fn sff_on_linear_flat_map_vanishes() {
        let f = paper_map();
        let v = f
            .second_fund_form_at(
                &[0.4, 0.2, -0.6, 0.1],
                &DVector::from_row_slice(&[1.0, 2.0, 3.0, 4.0]),
                &DVector::from_row_slice(&[-1.0, 0.5, 0.0, 2.0]),
                DerivMode::Jets,
            )
            .unwrap();
        assert!(v.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn sff_graph_values_at_origin() {
        let f = graph_with_kernel();
        let xx = f
            .second_fund_form_at(&[0.0; 4], &e(4, 0), &e(4, 0), DerivMode::Jets)
            .unwrap();
        assert_eq!(xx.as_slice(), &[0.0, 0.0, 2.0, 0.0]);
        let xy = f
            .second_fund_form_at(&[0.0; 4], &e(4, 0), &e(4, 1), DerivMode::Jets)
            .unwrap();
        assert_eq!(xy.as_slice(), &[0.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn sff_symmetric_and_bilinear() {
        let f = graph_with_kernel();
        let p = [0.3, -0.2, 0.5, 0.1];
        let x = DVector::from_row_slice(&[0.7, -1.1, 0.4, 0.9]);
        let y = DVector::from_row_slice(&[-0.3, 0.8, 1.2, -0.5]);
        let xy = f.second_fund_form_at(&p, &x, &y, DerivMode::Jets).unwrap();
        let yx = f.second_fund_form_at(&p, &y, &x, DerivMode::Jets).unwrap();
        for (a, b) in xy.iter().zip(yx.iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        // bilinearity against a random combination
        let z = DVector::from_row_slice(&[0.2, 0.6, -0.9, 0.3]);
        let combo = f
            .second_fund_form_at(&p, &x, &(&y * 2.0 + &z * -0.5), DerivMode::Jets)
            .unwrap();
        let xz = f.second_fund_form_at(&p, &x, &z, DerivMode::Jets).unwrap();
        let expected = &xy * 2.0 + &xz * -0.5;
        let scale = expected.norm().max(1.0);
        assert!((combo - expected).norm() < 1e-12 * scale);
    }

    #[test]
    fn tension_of_graph_vanishes() {
        let f = graph_with_kernel();
        let (tau, tau1, tau2) = f.tension_at(&[0.0; 4], DerivMode::Jets).unwrap();
        assert!(tau.norm() < 1e-15);
        assert!(tau1.norm() < 1e-15);
        assert!(tau2.norm() < 1e-15);

        // generic point: still harmonic, with τ¹ = 0 (holomorphic, Kähler source)
        let (tau, tau1, _) = f.tension_at(&[0.4, -0.7, 0.2, 0.5], DerivMode::Jets).unwrap();
        assert!(tau1.norm() < 1e-12, "tau1 = {}", tau1.norm());
        assert!(tau.norm() < 1e-12, "tau = {}", tau.norm());
    }

    #[test]
    fn tension_frame_independence() {
        let f = graph_with_kernel();
        let p = [0.5, 0.3, -0.4, 0.8];
        let split = f.tangent_split_at(&p, DEFAULT_RANK_TOL, DerivMode::Jets).unwrap();
        let (tau, tau1, tau2) = f.tension_with_split(&split, DerivMode::Jets).unwrap();

        // rotate both frames by in-plane rotations (still orthonormal)
        let mut rotated = split.clone();
        let (c, s) = (0.6f64, 0.8f64);
        let k0 = rotated.ker_frame[0].clone();
        let k1 = rotated.ker_frame[1].clone();
        rotated.ker_frame[0] = &k0 * c + &k1 * s;
        rotated.ker_frame[1] = &k0 * -s + &k1 * c;
        let h0 = rotated.hor_frame[0].clone();
        let h1 = rotated.hor_frame[1].clone();
        rotated.hor_frame[0] = &h0 * c + &h1 * s;
        rotated.hor_frame[1] = &h0 * -s + &h1 * c;

        let (tau_r, tau1_r, tau2_r) = f.tension_with_split(&rotated, DerivMode::Jets).unwrap();
        assert!((tau - tau_r).norm() < 1e-10);
        assert!((tau1 - tau1_r).norm() < 1e-10);
        assert!((tau2 - tau2_r).norm() < 1e-10);
    }

    #[test]
    fn mean_curvature_values() {
        let f = paper_map();
        let h = f.mean_curvature_range_at(&[0.1, 0.2, 0.3, 0.4], DerivMode::Jets).unwrap();
        assert!(h.norm() == 0.0);

        let g = graph_with_kernel();
        let h = g.mean_curvature_range_at(&[0.0; 4], DerivMode::Jets).unwrap();
        assert!(h.norm() < 1e-15);

        // parabola graph: κ(0) = 2, so ‖H‖ = 2 at the origin
        let pb = parabola_map();
        let h = pb.mean_curvature_range_at(&[0.0, 0.0], DerivMode::Jets).unwrap();
        assert!((h.norm() - 2.0).abs() < 1e-12, "‖H‖ = {}", h.norm());

        // H lies in the normal space
        let p = [0.3, 0.1];
        let split = pb.tangent_split_at(&p, DEFAULT_RANK_TOL, DerivMode::Jets).unwrap();
        let h = pb.mean_curvature_with_split(&split, DerivMode::Jets).unwrap();
        let g2 = pb.target().metric_at(&split.target_point).unwrap();
        let tangential = project_onto_frame(&g2, &split.range_frame, &h);
        assert!(tangential.norm() < 1e-8 * h.norm().max(1.0));
    }

    #[test]
    fn shape_operator_flat_constant_field() {
        let f = paper_map();
        let v = ["0", "0", "1", "0"].map(str::to_string);
        let v_field: Vec<ExprAst> = v
            .iter()
            .map(|s| ExprAst::parse(s, f.target().coords()).unwrap())
            .collect();
        let data = f.shape_operator_at(&[0.2, 0.1, -0.3, 0.5], &v_field, DerivMode::Jets).unwrap();
        assert!(data.s_matrix.iter().all(|&v| v == 0.0));
        assert!(data.normal_derivs.iter().all(|d| d.norm() == 0.0));
    }

    #[test]
    fn shape_operator_duality_value() {
        // V = (−2z1, 2z2, 1, 0) is normal along the graph; at the origin
        // g2(S_V F_*∂x, F_*∂x) = g2(V, (∇F_*)(∂x, ∂x)) = 2.
        let f = graph_with_kernel();
        let v = ["-2*z1", "2*z2", "1", "0"].map(str::to_string);
        let v_field: Vec<ExprAst> = v
            .iter()
            .map(|s| ExprAst::parse(s, f.target().coords()).unwrap())
            .collect();
        let origin = [0.0; 4];
        let split0 = f.tangent_split_at(&origin, DEFAULT_RANK_TOL, DerivMode::Jets).unwrap();
        let data = f.shape_operator_with_split(&split0, &v_field, DerivMode::Jets).unwrap();
        // expand ∂x in the horizontal frame: g2(S_V F_*∂x, F_*∂x) = cᵀ S c
        let g1 = f.source().metric_at(&origin).unwrap();
        let x_axis = e(4, 0);
        let coeffs: Vec<f64> = split0
            .hor_frame
            .iter()
            .map(|h| metric_dot(&g1, h, &x_axis))
            .collect();
        let mut value = 0.0;
        for a in 0..split0.rank {
            for b in 0..split0.rank {
                value += coeffs[a] * coeffs[b] * data.s_matrix[(b, a)];
            }
        }
        assert!((value - 2.0).abs() < 1e-12, "g2(S_V F∂x, F∂x) = {value}");

        // duality and symmetry at a generic point
        let p = [0.4, -0.6, 0.2, 0.0];
        let split = f.tangent_split_at(&p, DEFAULT_RANK_TOL, DerivMode::Jets).unwrap();
        let data = f.shape_operator_with_split(&split, &v_field, DerivMode::Jets).unwrap();
        let g2 = f.target().metric_at(&split.target_point).unwrap();
        let mut v_val = DVector::zeros(4);
        for (i, comp) in v_field.iter().enumerate() {
            v_val[i] = comp.eval_value(&split.target_point).unwrap();
        }
        for a in 0..split.rank {
            for b in 0..split.rank {
                let sff = f
                    .second_fund_form_at(&p, &split.hor_frame[a], &split.hor_frame[b], DerivMode::Jets)
                    .unwrap();
                let rhs = metric_dot(&g2, &v_val, &sff);
                assert!(
                    (data.s_matrix[(b, a)] - rhs).abs() < 1e-10,
                    "duality defect {}",
                    (data.s_matrix[(b, a)] - rhs).abs()
                );
                assert!((data.s_matrix[(b, a)] - data.s_matrix[(a, b)]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn shape_operator_rejects_tangent_field() {
        let f = graph_with_kernel();
        let v = ["1", "0", "0", "0"].map(str::to_string);
        let v_field: Vec<ExprAst> = v
            .iter()
            .map(|s| ExprAst::parse(s, f.target().coords()).unwrap())
            .collect();
        assert!(matches!(
            f.shape_operator_at(&[0.0; 4], &v_field, DerivMode::Jets),
            Err(Error::NotNormal { .. })
        ));
    }

    #[test]
    fn kernel_involutivity_defects() {
        let f = paper_map();
        let d = f
            .kernel_involutivity_defect_at(&[0.1, 0.4, -0.2, 0.3], DEFAULT_RANK_TOL, DerivMode::Jets)
            .unwrap();
        assert!(d < 1e-10, "defect {d}");

        let g = graph_with_kernel();
        // kernel projector is constantly diag(0,0,1,1)
        let (p, _) = g
            .kernel_projector_at(&[0.4, -0.3, 0.1, 0.6], DEFAULT_RANK_TOL, DerivMode::Jets)
            .unwrap();
        let mut expected = DMatrix::zeros(4, 4);
        expected[(2, 2)] = 1.0;
        expected[(3, 3)] = 1.0;
        assert!(crate::linalg::max_abs(&(p - expected)) < 1e-10);
        let d = g
            .kernel_involutivity_defect_at(&[0.4, -0.3, 0.1, 0.6], DEFAULT_RANK_TOL, DerivMode::Jets)
            .unwrap();
        assert!(d < 1e-6, "defect {d}");

        let id = identity_r4();
        let d = id
            .kernel_involutivity_defect_at(&[0.0; 4], DEFAULT_RANK_TOL, DerivMode::Jets)
            .unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn horizontal_involutivity_defect_of_constant_distribution() {
        let g = graph_with_kernel();
        let d = g
            .horizontal_involutivity_defect_at(&[0.2, 0.5, -0.1, 0.4], DEFAULT_RANK_TOL, DerivMode::Jets)
            .unwrap();
        assert!(d < 1e-6, "defect {d}");
    }

    #[test]
    fn rank_ambiguity_is_diagnosed() {
        // jacobian diag(1, 1e-8) sits exactly at the default threshold
        let source = flat(&["x", "y"], None, 2.0);
        let target = flat(&["w1", "w2"], None, 2.0);
        let f = SmoothMap::new(source, target, &strings(&["x", "0.00000001*y"])).unwrap();
        assert!(matches!(
            f.tangent_split_at(&[0.0, 0.0], DEFAULT_RANK_TOL, DerivMode::Jets),
            Err(Error::RankAmbiguous { .. })
        ));
    }

    #[test]
    fn map_component_count_checked() {
        let source = flat(&["x", "y"], None, 1.0);
        let target = flat(&["w1", "w2", "w3"], None, 1.0);
        assert!(matches!(
            SmoothMap::new(source, target, &strings(&["x", "y"])),
            Err(Error::Dimension { .. })
        ));
    }
}
