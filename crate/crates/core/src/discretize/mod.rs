//! Finite-rank discretizations `T_n = π_n T` and the assembled `n × n`
//! system for `T_n T_n*`.
//!
//! Every scheme is described by two ingredients:
//!
//! * rows `r_i ∈ L²(Ω)` with `(T_n x)_i = ∫ r_i(t) x(t) dt`;
//! * the metric `M` of `Y_n` in the chosen coordinates.
//!
//! Then `T_n* v = Σ_i r_i (M v)_i` and the matrix of `T_n T_n*` is
//! `A = G M` with `G_ij = ∫ r_i r_j`, self-adjoint in `M`.
//!
//! | scheme          | `Y_n`                    | `r_i(t)`                 | `M`            |
//! |-----------------|--------------------------|--------------------------|----------------|
//! | collocation     | `ℝⁿ_w`, quadrature weights | `k(t_i, t)`            | `diag(w)`      |
//! | interpolatory   | span of hat functions    | `k(t_i, t)`              | hat Gram       |
//! | ortho-pc        | piecewise constants      | `h⁻¹∫_{cell i} k(σ, t)dσ` | `h I`         |

mod dump;
mod epsilon;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

pub use dump::{read_matrix_csv, write_matrix_csv};
pub use epsilon::{discrete_normal_on_grid, estimate_epsilon, estimate_epsilon_with, EpsilonConfig, ReferenceOperator};

use crate::error::{Error, Result};
use crate::linalg::{min_positive_singular, symmetric_eigen, GramSpace, Matrix, Metric, WeightedSpace};
use crate::problem::{Function, Kernel};
use crate::quadrature::{
    composite_gauss, composite_trapezoid, gauss_legendre, Domain, QuadratureRule, REFERENCE_POINTS,
};
use crate::scalar::Scalar;

/// Default relative truncation for numerical rank decisions in `f64`.
pub const DEFAULT_REL_TOL: f64 = 1e-10;

/// `DEFAULT_REL_TOL`, raised to `1000 ε_mach` for lower precisions.
pub fn default_rel_tol<T: Scalar>() -> T {
    T::lit(DEFAULT_REL_TOL).max(T::lit(1000.0) * T::epsilon())
}

/// Inner-rule points per panel used by [`default_inner_rule`].
pub const DEFAULT_INNER_FACTOR: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CollocationNodes {
    GaussLegendre,
    Trapezoid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    /// Point evaluation into `ℝⁿ_w`.
    Collocation(CollocationNodes),
    /// Piecewise-linear interpolation on an equispaced grid.
    Interpolatory,
    /// L²-orthogonal projection onto piecewise constants.
    OrthoPiecewiseConstant,
}

impl SchemeKind {
    pub const COLLOCATION: Self = SchemeKind::Collocation(CollocationNodes::GaussLegendre);

    /// The three schemes of the default verification grid.
    pub fn defaults() -> [SchemeKind; 3] {
        [
            Self::COLLOCATION,
            SchemeKind::Interpolatory,
            SchemeKind::OrthoPiecewiseConstant,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            SchemeKind::Collocation(CollocationNodes::GaussLegendre) => "collocation",
            SchemeKind::Collocation(CollocationNodes::Trapezoid) => "collocation-trapezoid",
            SchemeKind::Interpolatory => "interpolatory",
            SchemeKind::OrthoPiecewiseConstant => "ortho-pc",
        }
    }

    /// Whether `π_n` is an orthogonal projection of `L²(Ω)`.
    pub fn is_orthogonal_projection(&self) -> bool {
        matches!(self, SchemeKind::OrthoPiecewiseConstant)
    }

    fn min_dimension(&self) -> usize {
        match self {
            SchemeKind::Collocation(CollocationNodes::GaussLegendre) | SchemeKind::OrthoPiecewiseConstant => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "collocation" | "collocation-gauss" => Ok(Self::COLLOCATION),
            "collocation-trapezoid" => Ok(SchemeKind::Collocation(CollocationNodes::Trapezoid)),
            "interpolatory" => Ok(SchemeKind::Interpolatory),
            "ortho-pc" | "ortho-piecewise-constant" => Ok(SchemeKind::OrthoPiecewiseConstant),
            other => Err(Error::InvalidParameter(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Representers of `T_n` (see module docs).
#[derive(Clone, Debug)]
pub(crate) enum Rows<T> {
    Point { kernel: Kernel<T>, nodes: Vec<T> },
    Cell { kernel: Kernel<T>, cells: CellRule<T> },
}

impl<T: Scalar> Rows<T> {
    fn len(&self) -> usize {
        match self {
            Rows::Point { nodes, .. } => nodes.len(),
            Rows::Cell { cells, .. } => cells.n,
        }
    }

    #[inline]
    pub(crate) fn eval(&self, i: usize, t: T) -> T {
        match self {
            Rows::Point { kernel, nodes } => kernel.eval(nodes[i], t),
            Rows::Cell { kernel, cells } => cells.average(i, |s| kernel.eval(s, t)),
        }
    }

    pub(crate) fn eval_all(&self, t: T) -> Vec<T> {
        (0..self.len()).map(|i| self.eval(i, t)).collect()
    }
}

/// Composite Gauss rule with `per_cell` points in each of `n` equal cells.
#[derive(Clone, Debug)]
pub struct CellRule<T> {
    n: usize,
    per_cell: usize,
    width: T,
    edges: Vec<T>,
    rule: QuadratureRule<T>,
}

impl<T: Scalar> CellRule<T> {
    fn new(dom: Domain<T>, n: usize) -> Result<Self> {
        let per_cell = REFERENCE_POINTS.div_ceil(n).max(4);
        let edges = dom.linspace(n + 1);
        let rule = composite_gauss(&edges, per_cell)?;
        Ok(Self {
            n,
            per_cell,
            width: dom.length() / T::from_usize_lossy(n),
            edges,
            rule,
        })
    }

    /// Cell average `h⁻¹ ∫_{cell i} f`.
    pub fn average(&self, i: usize, f: impl Fn(T) -> T) -> T {
        let lo = i * self.per_cell;
        let nodes = &self.rule.nodes()[lo..lo + self.per_cell];
        let weights = &self.rule.weights()[lo..lo + self.per_cell];
        nodes.iter().zip(weights).map(|(&s, &w)| w * f(s)).sum::<T>() / self.width
    }

    pub fn rule(&self) -> &QuadratureRule<T> {
        &self.rule
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn per_cell(&self) -> usize {
        self.per_cell
    }
}

/// Scheme-specific data: nodes, point weights or cell layout.
#[derive(Clone, Debug)]
enum Layout<T> {
    Collocation { rule: QuadratureRule<T>, edges: Vec<T> },
    Hats { nodes: Vec<T>, h: T },
    Cells { cells: CellRule<T> },
}

impl<T: Scalar> Layout<T> {
    fn new(scheme: SchemeKind, n: usize, dom: Domain<T>) -> Result<Self> {
        if n < scheme.min_dimension() {
            return Err(Error::InvalidParameter(format!(
                "{scheme} needs n >= {}, got {n}",
                scheme.min_dimension()
            )));
        }
        Ok(match scheme {
            SchemeKind::Collocation(nodes) => {
                let rule = match nodes {
                    CollocationNodes::GaussLegendre => gauss_legendre(n, dom)?,
                    CollocationNodes::Trapezoid => composite_trapezoid(n, dom)?,
                };
                let edges = collocation_cell_edges(&rule, dom);
                Layout::Collocation { rule, edges }
            }
            SchemeKind::Interpolatory => Layout::Hats {
                nodes: dom.linspace(n),
                h: dom.length() / T::from_usize_lossy(n - 1),
            },
            SchemeKind::OrthoPiecewiseConstant => Layout::Cells {
                cells: CellRule::new(dom, n)?,
            },
        })
    }

    fn nodes(&self) -> Vec<T> {
        match self {
            Layout::Collocation { rule, .. } => rule.nodes().to_vec(),
            Layout::Hats { nodes, .. } => nodes.clone(),
            Layout::Cells { cells } => cells.edges.windows(2).map(|e| (e[0] + e[1]) * T::lit(0.5)).collect(),
        }
    }

    /// Points where rows may lose smoothness for kernels with a diagonal kink.
    fn kink_points(&self) -> Vec<T> {
        match self {
            Layout::Collocation { rule, .. } => rule.nodes().to_vec(),
            Layout::Hats { nodes, .. } => nodes.clone(),
            Layout::Cells { cells } => {
                let mut pts = cells.edges.clone();
                pts.extend_from_slice(cells.rule.nodes());
                pts
            }
        }
    }

    fn metric(&self) -> Result<Metric<T>> {
        match self {
            Layout::Collocation { rule, .. } => Ok(WeightedSpace::new(rule.weights().to_vec())?.into()),
            Layout::Hats { nodes, h } => Ok(Metric::Gram(GramSpace::new(hat_gram(nodes.len(), *h))?)),
            Layout::Cells { cells } => Ok(WeightedSpace::new(vec![cells.width; cells.n])?.into()),
        }
    }

    /// Breakpoints of the L² functions that represent `Y_n` inside `L²(Ω)`.
    fn basis_breakpoints(&self) -> &[T] {
        match self {
            Layout::Collocation { edges, .. } => edges,
            Layout::Hats { nodes, .. } => nodes,
            Layout::Cells { cells } => &cells.edges,
        }
    }
}

/// Gram matrix of equispaced hats: interior diagonal `2h/3`, boundary `h/3`, off-diagonal `h/6`.
pub fn hat_gram<T: Scalar>(n: usize, h: T) -> Matrix<T> {
    let third = h / T::lit(3.0);
    let sixth = h / T::lit(6.0);
    Matrix::from_fn(n, n, |i, j| {
        if i == j {
            if i == 0 || i + 1 == n {
                third
            } else {
                third + third
            }
        } else if i.abs_diff(j) == 1 {
            sixth
        } else {
            T::zero()
        }
    })
}

/// Consecutive intervals of length `w_i` tiling `[a, b]`; `v ↦ Σ v_i χ_i` is
/// an isometry of `ℝⁿ_w` into `L²(Ω)`.
fn collocation_cell_edges<T: Scalar>(rule: &QuadratureRule<T>, dom: Domain<T>) -> Vec<T> {
    let mut edges = Vec::with_capacity(rule.len() + 1);
    let mut acc = dom.a;
    edges.push(acc);
    for &w in &rule.weights()[..rule.len() - 1] {
        acc += w;
        edges.push(acc);
    }
    edges.push(dom.b);
    edges
}

/// Breakpoint-aligned composite Gauss rule with `per_panel` points on every
/// panel between consecutive scheme nodes (and, for ortho-pc, cell-rule nodes),
/// raised if needed to reach `4n` points in total.
pub fn default_inner_rule<T: Scalar>(
    dom: Domain<T>,
    scheme: SchemeKind,
    n: usize,
    per_panel: usize,
) -> Result<QuadratureRule<T>> {
    let layout = Layout::new(scheme, n, dom)?;
    let mut breaks = layout.kink_points();
    breaks.push(dom.a);
    breaks.push(dom.b);
    breaks.sort_by(|x, y| x.partial_cmp(y).expect("finite breakpoints"));
    breaks.dedup();
    let panels = breaks.len() - 1;
    composite_gauss(&breaks, per_panel.max((4 * n).div_ceil(panels)))
}

/// One assembled discretization.
#[derive(Debug)]
pub struct DiscreteSystem<T> {
    scheme: SchemeKind,
    kernel: Kernel<T>,
    layout: Layout<T>,
    rows: Rows<T>,
    metric: Metric<T>,
    inner_rule: QuadratureRule<T>,
    matrix: Matrix<T>,
    symmetric: Matrix<T>,
    spectrum: Vec<T>,
    rel_tol: T,
    sigma_min: Option<T>,
    epsilon: OnceLock<T>,
}

impl<T: Scalar> Clone for DiscreteSystem<T> {
    fn clone(&self) -> Self {
        let epsilon = OnceLock::new();
        if let Some(&e) = self.epsilon.get() {
            let _ = epsilon.set(e);
        }
        Self {
            scheme: self.scheme,
            kernel: self.kernel.clone(),
            layout: self.layout.clone(),
            rows: self.rows.clone(),
            metric: self.metric.clone(),
            inner_rule: self.inner_rule.clone(),
            matrix: self.matrix.clone(),
            symmetric: self.symmetric.clone(),
            spectrum: self.spectrum.clone(),
            rel_tol: self.rel_tol,
            sigma_min: self.sigma_min,
            epsilon,
        }
    }
}

/// Assembles the system with [`default_inner_rule`] (4 points per panel).
pub fn build_default_system<T: Scalar>(kernel: &Kernel<T>, scheme: SchemeKind, n: usize) -> Result<DiscreteSystem<T>> {
    let inner = default_inner_rule(kernel.domain(), scheme, n, DEFAULT_INNER_FACTOR)?;
    build_system(kernel, scheme, n, &inner)
}

/// Assembles `A = [a_ij]`, the matrix of `T_n T_n*`, with entry integrals
/// computed by `inner_rule` (at least `4n` points).
pub fn build_system<T: Scalar>(
    kernel: &Kernel<T>,
    scheme: SchemeKind,
    n: usize,
    inner_rule: &QuadratureRule<T>,
) -> Result<DiscreteSystem<T>> {
    let dom = kernel.domain();
    if inner_rule.len() < 4 * n {
        return Err(Error::RuleTooCoarse(format!(
            "inner rule has {} points, need at least 4n = {}",
            inner_rule.len(),
            4 * n
        )));
    }
    if inner_rule.domain() != dom {
        return Err(Error::InvalidParameter("inner rule lives on a different domain".into()));
    }
    let layout = Layout::new(scheme, n, dom)?;
    let rows = match &layout {
        Layout::Cells { cells } => Rows::Cell {
            kernel: kernel.clone(),
            cells: cells.clone(),
        },
        _ => Rows::Point {
            kernel: kernel.clone(),
            nodes: layout.nodes(),
        },
    };
    let metric = layout.metric()?;

    // Weighted rows: E_iq = r_i(τ_q) √ω_q, so G = E Eᵀ.
    let mut e = Matrix::zeros(n, inner_rule.len());
    for (q, (t, w)) in inner_rule.iter().enumerate() {
        let sw = w.sqrt();
        for i in 0..n {
            let v = rows.eval(i, t);
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("kernel sample for row {i} at t = {t}")));
            }
            e[(i, q)] = v * sw;
        }
    }
    let mut gram = e.matmul(&e.transpose())?;
    gram.symmetrize_in_place();
    let matrix = gram.matmul(&metric.matrix())?;

    let mut system = DiscreteSystem {
        scheme,
        kernel: kernel.clone(),
        layout,
        rows,
        metric,
        inner_rule: inner_rule.clone(),
        matrix: Matrix::zeros(0, 0),
        symmetric: Matrix::zeros(0, 0),
        spectrum: Vec::new(),
        rel_tol: default_rel_tol(),
        sigma_min: None,
        epsilon: OnceLock::new(),
    };
    system.install_matrix(matrix)?;
    Ok(system)
}

impl<T: Scalar> DiscreteSystem<T> {
    /// Validates and installs a matrix for `T_n T_n*`: self-adjoint in the
    /// metric and positive semidefinite (smallest eigenvalue of the
    /// symmetrized matrix at least `−1e-8 · largest`).
    fn install_matrix(&mut self, matrix: Matrix<T>) -> Result<()> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite("system matrix".into()));
        }
        let symmetric = self.metric.symmetrize(&matrix)?;
        let eig = symmetric_eigen(&symmetric)?;
        let largest = eig.largest().max(T::zero());
        if eig.smallest() < -crate::linalg::self_adjoint_tol::<T>() * largest {
            return Err(Error::NotPositive(format!(
                "smallest eigenvalue {:e} against largest {:e}",
                eig.smallest(),
                largest
            )));
        }
        // Same truncation rule as `pseudo_solve`, so `‖T_n†‖ = 1/σ_min` holds
        // for the solver actually used.
        self.sigma_min = match min_positive_singular(&symmetric, self.rel_tol) {
            Ok(l) => Some(l.sqrt()),
            Err(Error::NumericallyZero) => None,
            Err(e) => return Err(e),
        };
        self.spectrum = eig.values;
        self.symmetric = symmetric;
        self.matrix = matrix;
        let _ = self.epsilon.take();
        Ok(())
    }

    /// Same discretization with an externally supplied matrix (e.g. replayed
    /// from a CSV dump). Fails if the matrix is not a valid `T_n T_n*`.
    pub fn with_matrix(&self, matrix: Matrix<T>) -> Result<Self> {
        let mut sys = self.clone();
        sys.install_matrix(matrix)?;
        Ok(sys)
    }

    pub fn set_rel_tol(&mut self, rel_tol: T) -> Result<()> {
        if !(rel_tol > T::zero() && rel_tol < T::one()) {
            return Err(Error::InvalidParameter(format!(
                "rel_tol must lie in (0, 1), got {rel_tol}"
            )));
        }
        self.rel_tol = rel_tol;
        let m = self.matrix.clone();
        self.install_matrix(m)
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn kernel(&self) -> &Kernel<T> {
        &self.kernel
    }

    pub fn domain(&self) -> Domain<T> {
        self.kernel.domain()
    }

    /// Collocation/interpolation nodes, or cell midpoints.
    pub fn nodes(&self) -> Vec<T> {
        self.layout.nodes()
    }

    pub fn metric(&self) -> &Metric<T> {
        &self.metric
    }

    pub fn inner_rule(&self) -> &QuadratureRule<T> {
        &self.inner_rule
    }

    /// Matrix of `T_n T_n*` in the chosen coordinates.
    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    /// `Lᵀ A L⁻ᵀ` where `M = L Lᵀ`: symmetric positive semidefinite, same spectrum as `A`.
    pub fn symmetric_matrix(&self) -> &Matrix<T> {
        &self.symmetric
    }

    /// Eigenvalues of `T_n T_n*`, ascending.
    pub fn spectrum(&self) -> &[T] {
        &self.spectrum
    }

    pub fn rel_tol(&self) -> T {
        self.rel_tol
    }

    /// Smallest positive singular value of `T_n`.
    pub fn sigma_min(&self) -> Result<T> {
        self.sigma_min.ok_or(Error::NumericallyZero)
    }

    /// `‖T_n‖`, the largest singular value.
    pub fn sigma_max(&self) -> T {
        self.spectrum
            .last()
            .copied()
            .unwrap_or_else(T::zero)
            .max(T::zero())
            .sqrt()
    }

    /// Cached `ε_n`, if [`estimate_epsilon`] has run.
    pub fn epsilon(&self) -> Option<T> {
        self.epsilon.get().copied()
    }

    /// Records an externally known `ε_n` (first write wins).
    pub fn set_epsilon(&self, eps: T) -> T {
        *self.epsilon.get_or_init(|| eps)
    }

    /// Ortho-pc cell layout.
    pub fn cell_rule(&self) -> Option<&CellRule<T>> {
        match &self.layout {
            Layout::Cells { cells } => Some(cells),
            _ => None,
        }
    }

    /// `r_i(t)`: `(T_n x)_i = ∫ r_i x`.
    pub fn row(&self, i: usize, t: T) -> T {
        self.rows.eval(i, t)
    }

    pub(crate) fn rows_at(&self, t: T) -> Vec<T> {
        self.rows.eval_all(t)
    }

    /// Points where reconstructions `T_n* v` may have derivative jumps
    /// (for kernels with a diagonal kink).
    pub fn kink_points(&self) -> Vec<T> {
        self.layout.kink_points()
    }

    /// Breakpoints of the functions embedding `Y_n` into `L²(Ω)`.
    pub fn basis_breakpoints(&self) -> Vec<T> {
        self.layout.basis_breakpoints().to_vec()
    }

    /// `i`-th basis function of `Y_n` viewed inside `L²(Ω)`: hats, cell
    /// indicators, or (collocation) indicators of intervals of length `w_i`.
    pub fn basis_function(&self, i: usize, s: T) -> T {
        match &self.layout {
            Layout::Hats { nodes, h } => {
                let d = (s - nodes[i]).abs() / *h;
                if d < T::one() {
                    T::one() - d
                } else {
                    T::zero()
                }
            }
            _ => {
                let edges = self.layout.basis_breakpoints();
                let inside = s >= edges[i] && (s < edges[i + 1] || (i + 2 == edges.len() && s <= edges[i + 1]));
                if inside {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }

    /// Coordinates of `π_n f`.
    pub fn project(&self, f: &Function<T>) -> Vec<T> {
        match &self.layout {
            Layout::Cells { cells } => (0..cells.n).map(|i| cells.average(i, |s| f.eval(s))).collect(),
            _ => f.sample(&self.layout.nodes()),
        }
    }

    /// `T_n x` with the integral in `t` done by `rule`.
    pub fn apply_forward(&self, x: &Function<T>, rule: &QuadratureRule<T>) -> Vec<T> {
        let mut out = vec![T::zero(); self.n()];
        for (t, w) in rule.iter() {
            let wx = w * x.eval(t);
            for (o, r) in out.iter_mut().zip(self.rows.eval_all(t)) {
                *o += r * wx;
            }
        }
        out
    }

    /// `T_n* v = Σ_i r_i (M v)_i` as an element of `L²(Ω)`.
    pub fn apply_adjoint(&self, v: &[T]) -> Result<Function<T>> {
        if v.len() != self.n() {
            return Err(Error::DimensionMismatch(format!(
                "coordinate vector of length {} for n = {}",
                v.len(),
                self.n()
            )));
        }
        let coef = self.metric.apply(v);
        if coef.iter().all(|c| *c == T::zero()) {
            return Ok(Function::zero());
        }
        let rows = self.rows.clone();
        Ok(Function::new(move |t| {
            coef.iter()
                .enumerate()
                .filter(|(_, c)| **c != T::zero())
                .map(|(i, &c)| c * rows.eval(i, t))
                .sum()
        }))
    }
}

pub fn project_data<T: Scalar>(sys: &DiscreteSystem<T>, f: &Function<T>) -> Vec<T> {
    sys.project(f)
}

pub fn apply_adjoint<T: Scalar>(sys: &DiscreteSystem<T>, v: &[T]) -> Result<Function<T>> {
    sys.apply_adjoint(v)
}
