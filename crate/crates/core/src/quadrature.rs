//! Quadrature rules on an interval `[a, b]`.
//!
//! Measurement standard for the whole crate: "exact" L² quantities are
//! evaluated on the 256-point Gauss–Legendre reference grid
//! ([`REFERENCE_POINTS`]). Integrals in the *second* variable of a kernel
//! evaluated at reference nodes use [`Reference::fine`], a composite
//! 3-point Gauss rule with breakpoints at every reference node, so kernels
//! with a derivative jump on the diagonal (such as the Green kernel) are
//! integrated to near machine precision.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of Gauss–Legendre points in the reference grid.
pub const REFERENCE_POINTS: usize = 256;

/// Points per panel of the breakpoint-aligned rule attached to the reference grid.
const FINE_POINTS_PER_PANEL: usize = 3;

/// The interval `[a, b]`, `a < b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Domain<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> Domain<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidParameter(format!("domain needs a < b, got [{a}, {b}]")));
        }
        Ok(Self { a, b })
    }

    pub fn unit() -> Self {
        Self {
            a: T::zero(),
            b: T::one(),
        }
    }

    pub fn length(&self) -> T {
        self.b - self.a
    }

    /// `count` equispaced points including both endpoints.
    pub fn linspace(&self, count: usize) -> Vec<T> {
        match count {
            0 => Vec::new(),
            1 => vec![self.a],
            _ => {
                let h = self.length() / T::from_usize_lossy(count - 1);
                (0..count)
                    .map(|i| {
                        if i + 1 == count {
                            self.b
                        } else {
                            self.a + h * T::from_usize_lossy(i)
                        }
                    })
                    .collect()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule<T> {
    domain: Domain<T>,
    nodes: Vec<T>,
    weights: Vec<T>,
    exactness_degree: usize,
}

impl<T: Scalar> QuadratureRule<T> {
    /// Validates strictly increasing nodes inside the domain and positive weights.
    pub fn new(domain: Domain<T>, nodes: Vec<T>, weights: Vec<T>, exactness_degree: usize) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidParameter(format!(
                "rule needs as many weights as nodes ({} vs {})",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParameter("nodes must be strictly increasing".into()));
        }
        if nodes[0] < domain.a || *nodes.last().expect("non-empty") > domain.b {
            return Err(Error::InvalidParameter("nodes must lie in the domain".into()));
        }
        if weights.iter().any(|w| !(*w > T::zero()) || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be positive".into()));
        }
        Ok(Self {
            domain,
            nodes,
            weights,
            exactness_degree,
        })
    }

    pub fn domain(&self) -> Domain<T> {
        self.domain
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Polynomial degree integrated exactly (per panel for composite rules).
    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    pub fn integrate(&self, f: impl Fn(T) -> T) -> T {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre_reference<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::from_usize_lossy(n);
    let pi = T::lit(std::f64::consts::PI);
    for i in 0..n.div_ceil(2) {
        let mut x = (pi * (T::from_usize_lossy(i) + T::lit(0.75)) / (nf + T::lit(0.5))).cos();
        let mut dp = T::one();
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= T::epsilon() * T::lit(4.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = T::lit(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = w;
        nodes[i] = -x;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

fn legendre_with_derivative<T: Scalar>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kf = T::from_usize_lossy(k);
        let p2 = ((T::lit(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = T::from_usize_lossy(n);
    let d = nf * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// `n`-point Gauss–Legendre rule mapped to `dom`; exact for degree `2n − 1`.
pub fn gauss_legendre<T: Scalar>(n: usize, dom: Domain<T>) -> Result<QuadratureRule<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("Gauss rule needs n >= 1".into()));
    }
    let (x, w) = gauss_legendre_reference::<T>(n);
    let half = dom.length() * T::lit(0.5);
    let mid = (dom.a + dom.b) * T::lit(0.5);
    QuadratureRule::new(
        dom,
        x.into_iter().map(|x| mid + half * x).collect(),
        w.into_iter().map(|w| w * half).collect(),
        2 * n - 1,
    )
}

/// `n` equispaced nodes including the endpoints, weights `h·(½, 1, …, 1, ½)`.
pub fn composite_trapezoid<T: Scalar>(n: usize, dom: Domain<T>) -> Result<QuadratureRule<T>> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("trapezoid rule needs n >= 2, got {n}")));
    }
    let h = dom.length() / T::from_usize_lossy(n - 1);
    let mut weights = vec![h; n];
    weights[0] = h * T::lit(0.5);
    weights[n - 1] = h * T::lit(0.5);
    QuadratureRule::new(dom, dom.linspace(n), weights, 1)
}

/// Composite Gauss–Legendre rule with `per_panel` points on each panel
/// between consecutive breakpoints. Breakpoints are sorted and deduplicated;
/// the first and last define the domain.
pub fn composite_gauss<T: Scalar>(breakpoints: &[T], per_panel: usize) -> Result<QuadratureRule<T>> {
    if per_panel == 0 {
        return Err(Error::InvalidParameter(
            "composite Gauss needs at least one point per panel".into(),
        ));
    }
    let mut edges: Vec<T> = breakpoints.to_vec();
    edges.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    edges.dedup();
    if edges.len() < 2 {
        return Err(Error::InvalidParameter(
            "composite Gauss needs two distinct breakpoints".into(),
        ));
    }
    let dom = Domain::new(edges[0], *edges.last().expect("non-empty"))?;
    let (x, w) = gauss_legendre_reference::<T>(per_panel);
    let mut nodes = Vec::with_capacity((edges.len() - 1) * per_panel);
    let mut weights = Vec::with_capacity(nodes.capacity());
    for pair in edges.windows(2) {
        let half = (pair[1] - pair[0]) * T::lit(0.5);
        let mid = (pair[0] + pair[1]) * T::lit(0.5);
        for (&xi, &wi) in x.iter().zip(&w) {
            nodes.push(mid + half * xi);
            weights.push(wi * half);
        }
    }
    QuadratureRule::new(dom, nodes, weights, 2 * per_panel - 1)
}

/// Reference grid plus the breakpoint-aligned rule used for integrals of
/// kernels evaluated at grid nodes.
#[derive(Clone, Debug)]
pub struct Reference<T> {
    pub grid: QuadratureRule<T>,
    pub fine: QuadratureRule<T>,
}

impl<T: Scalar> Reference<T> {
    pub fn standard(dom: Domain<T>) -> Result<Self> {
        Self::with_points(REFERENCE_POINTS, dom)
    }

    pub fn with_points(points: usize, dom: Domain<T>) -> Result<Self> {
        Self::from_grid(gauss_legendre(points, dom)?)
    }

    pub fn from_grid(grid: QuadratureRule<T>) -> Result<Self> {
        let dom = grid.domain();
        let mut breaks = Vec::with_capacity(grid.len() + 2);
        breaks.push(dom.a);
        breaks.extend_from_slice(grid.nodes());
        breaks.push(dom.b);
        let fine = composite_gauss(&breaks, FINE_POINTS_PER_PANEL)?;
        Ok(Self { grid, fine })
    }

    pub fn domain(&self) -> Domain<T> {
        self.grid.domain()
    }
}
