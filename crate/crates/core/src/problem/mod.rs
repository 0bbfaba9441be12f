//! Kernels, the integral operator they define, and analytic test problems
//! with known minimum-norm solutions.

mod catalog;

use std::fmt;
use std::sync::Arc;

pub use catalog::{
    builtin_ids, catalog, green_kernel, green_problem, make_separable_problem, sine_expansion, GREEN_TERMS,
};

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, Domain, QuadratureRule, Reference, REFERENCE_POINTS};
use crate::regularize::SourcePhi;
use crate::scalar::Scalar;

/// Shared, pure real function of one variable.
#[derive(Clone)]
pub struct Function<T>(Arc<dyn Fn(T) -> T + Send + Sync>);

impl<T: Scalar> Function<T> {
    pub fn new(f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }

    pub fn zero() -> Self {
        Self::new(|_| T::zero())
    }

    pub fn constant(c: T) -> Self {
        Self::new(move |_| c)
    }

    #[inline]
    pub fn eval(&self, t: T) -> T {
        (self.0)(t)
    }

    pub fn sample(&self, nodes: &[T]) -> Vec<T> {
        nodes.iter().map(|&t| self.eval(t)).collect()
    }
}

impl<T> fmt::Debug for Function<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Function(..)")
    }
}

/// Continuous kernel `k(s, t)` on `Ω × Ω`.
#[derive(Clone)]
pub struct Kernel<T> {
    eval: Arc<dyn Fn(T, T) -> T + Send + Sync>,
    domain: Domain<T>,
    note: String,
}

impl<T: Scalar> Kernel<T> {
    /// Spot-checks finiteness on a 32×32 grid.
    pub fn new(
        domain: Domain<T>,
        note: impl Into<String>,
        f: impl Fn(T, T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        let grid = domain.linspace(32);
        for &s in &grid {
            for &t in &grid {
                let v = f(s, t);
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!("kernel value at ({s}, {t})")));
                }
            }
        }
        Ok(Self {
            eval: Arc::new(f),
            domain,
            note: note.into(),
        })
    }

    #[inline]
    pub fn eval(&self, s: T, t: T) -> T {
        (self.eval)(s, t)
    }

    pub fn domain(&self) -> Domain<T> {
        self.domain
    }

    /// Free-form smoothness description.
    pub fn note(&self) -> &str {
        &self.note
    }
}

impl<T> fmt::Debug for Kernel<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Kernel")
            .field("note", &self.note)
            .finish_non_exhaustive()
    }
}

/// `(Tx)(s) ≈ Σ_i w_i k(s, t_i) x(t_i)` with the given rule. Accuracy is that
/// of the rule on `t ↦ k(s, t) x(t)`; for kernels with a diagonal kink use a
/// rule with a breakpoint at `s` (see [`Reference::fine`]).
pub fn apply_operator<T: Scalar>(kernel: &Kernel<T>, rule: &QuadratureRule<T>, x: &Function<T>) -> Function<T> {
    let nodes = rule.nodes().to_vec();
    let wx: Vec<T> = rule.iter().map(|(t, w)| w * x.eval(t)).collect();
    let kernel = kernel.clone();
    Function::new(move |s| nodes.iter().zip(&wx).map(|(&t, &c)| kernel.eval(s, t) * c).sum())
}

/// `T x` evaluated at the reference grid nodes, integrating with the aligned fine rule.
pub fn apply_on_grid<T: Scalar>(kernel: &Kernel<T>, reference: &Reference<T>, x: &Function<T>) -> Vec<T> {
    let fine = &reference.fine;
    let wx: Vec<T> = fine.iter().map(|(t, w)| w * x.eval(t)).collect();
    reference
        .grid
        .nodes()
        .iter()
        .map(|&s| fine.nodes().iter().zip(&wx).map(|(&t, &c)| kernel.eval(s, t) * c).sum())
        .collect()
}

fn l2_on<T: Scalar>(rule: &QuadratureRule<T>, values: impl Iterator<Item = T>) -> T {
    rule.weights()
        .iter()
        .zip(values)
        .map(|(&w, v)| w * v * v)
        .sum::<T>()
        .sqrt()
}

fn check_tol<T: Scalar>(base: f64) -> T {
    T::lit(base).max(T::epsilon() * T::lit(1e3))
}

/// One term `σ u(t) v(s)` of a singular expansion.
#[derive(Clone, Debug)]
pub struct SingularTriple<T> {
    pub sigma: T,
    pub u: Function<T>,
    pub v: Function<T>,
}

/// Finite singular system `k(s,t) = Σ_j σ_j v_j(s) u_j(t)`.
#[derive(Clone, Debug)]
pub struct SeparableExpansion<T> {
    domain: Domain<T>,
    terms: Vec<SingularTriple<T>>,
}

impl<T: Scalar> SeparableExpansion<T> {
    /// Checks `σ_j > 0` and orthonormality of `{u_j}`, `{v_j}` to `1e-8` under
    /// the reference Gauss rule.
    pub fn new(domain: Domain<T>, terms: Vec<SingularTriple<T>>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter("separable expansion needs rank >= 1".into()));
        }
        if let Some(t) = terms.iter().find(|t| !(t.sigma > T::zero()) || !t.sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "singular values must be positive, got {}",
                t.sigma
            )));
        }
        let rule = gauss_legendre(REFERENCE_POINTS, domain)?;
        let us: Vec<Vec<T>> = terms.iter().map(|t| t.u.sample(rule.nodes())).collect();
        let vs: Vec<Vec<T>> = terms.iter().map(|t| t.v.sample(rule.nodes())).collect();
        let tol = check_tol::<T>(1e-8);
        for family in [&us, &vs] {
            for i in 0..family.len() {
                for j in 0..=i {
                    let g: T = rule
                        .weights()
                        .iter()
                        .zip(family[i].iter().zip(&family[j]))
                        .map(|(&w, (&a, &b))| w * a * b)
                        .sum();
                    let target = if i == j { T::one() } else { T::zero() };
                    if (g - target).abs() > tol {
                        return Err(Error::InvalidParameter(format!(
                            "singular functions {i},{j} not orthonormal (inner product {g})"
                        )));
                    }
                }
            }
        }
        Ok(Self { domain, terms })
    }

    pub fn rank(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[SingularTriple<T>] {
        &self.terms
    }

    pub fn domain(&self) -> Domain<T> {
        self.domain
    }

    pub fn truncated(&self, rank: usize) -> Self {
        Self {
            domain: self.domain,
            terms: self.terms[..rank.min(self.terms.len())].to_vec(),
        }
    }

    /// Kernel synthesised from the expansion.
    pub fn kernel(&self, note: &str) -> Result<Kernel<T>> {
        let terms = self.terms.clone();
        Kernel::new(self.domain, note, move |s, t| {
            terms
                .iter()
                .map(|term| term.sigma * term.v.eval(s) * term.u.eval(t))
                .sum()
        })
    }

    /// `Σ_j ⟨f, v_j⟩ / σ_j · u_j` (the generalized inverse applied to `f`).
    pub fn pseudoinverse_apply(&self, f: &Function<T>, rule: &QuadratureRule<T>) -> Function<T> {
        self.spectral_filter(f, rule, |s| T::one() / s)
    }

    /// `Σ_j σ_j⟨f, v_j⟩ / (σ_j² + α) · u_j`, the Tikhonov solution for data `f`.
    pub fn tikhonov_apply(&self, f: &Function<T>, rule: &QuadratureRule<T>, alpha: T) -> Function<T> {
        self.spectral_filter(f, rule, move |s| s / (s * s + alpha))
    }

    fn spectral_filter(&self, f: &Function<T>, rule: &QuadratureRule<T>, filter: impl Fn(T) -> T) -> Function<T> {
        let coef: Vec<T> = self
            .terms
            .iter()
            .map(|term| filter(term.sigma) * rule.integrate(|t| f.eval(t) * term.v.eval(t)))
            .collect();
        let us: Vec<Function<T>> = self.terms.iter().map(|t| t.u.clone()).collect();
        Function::new(move |t| us.iter().zip(&coef).map(|(u, &c)| c * u.eval(t)).sum())
    }
}

/// `x† = φ(T*T) u` with `‖u‖ ≤ u_norm`.
#[derive(Clone, Debug)]
pub struct SourceRepresentation<T> {
    pub phi: SourcePhi<T>,
    pub u_norm: T,
}

/// Kernel with exact minimum-norm solution `x†` and exact data `y = T x†`.
#[derive(Clone, Debug)]
pub struct TestProblem<T> {
    pub id: String,
    pub kernel: Kernel<T>,
    pub x_dagger: Function<T>,
    pub y: Function<T>,
    pub svd: Option<SeparableExpansion<T>>,
    pub source: Option<SourceRepresentation<T>>,
}

impl<T: Scalar> TestProblem<T> {
    /// Validates `‖T x† − y‖ ≤ 1e-8` on the reference grid and, when a
    /// singular system is attached, that `x† ∈ N(T)^⊥` (its expansion in
    /// `{u_j}` reconstructs it to `1e-6`).
    pub fn new(
        id: impl Into<String>,
        kernel: Kernel<T>,
        x_dagger: Function<T>,
        y: Function<T>,
        svd: Option<SeparableExpansion<T>>,
        source: Option<SourceRepresentation<T>>,
    ) -> Result<Self> {
        let id = id.into();
        let reference = Reference::standard(kernel.domain())?;
        let tx = apply_on_grid(&kernel, &reference, &x_dagger);
        let residual = l2_on(
            &reference.grid,
            tx.iter().zip(reference.grid.nodes()).map(|(&a, &s)| a - y.eval(s)),
        );
        if residual > check_tol::<T>(1e-8) {
            return Err(Error::InvalidParameter(format!(
                "problem {id}: ‖T x† − y‖ = {residual:e}"
            )));
        }
        if let Some(exp) = &svd {
            let grid = &reference.grid;
            let coef: Vec<T> = exp
                .terms()
                .iter()
                .map(|t| grid.integrate(|s| x_dagger.eval(s) * t.u.eval(s)))
                .collect();
            let gap = l2_on(
                grid,
                grid.nodes().iter().map(|&s| {
                    x_dagger.eval(s) - exp.terms().iter().zip(&coef).map(|(t, &c)| c * t.u.eval(s)).sum::<T>()
                }),
            );
            if gap > check_tol::<T>(1e-6) {
                return Err(Error::InvalidParameter(format!(
                    "problem {id}: x† has a component in N(T) (gap {gap:e})"
                )));
            }
        }
        Ok(Self {
            id,
            kernel,
            x_dagger,
            y,
            svd,
            source,
        })
    }

    pub fn domain(&self) -> Domain<T> {
        self.kernel.domain()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_kernel_maps_constants() {
        let dom = Domain::<f64>::unit();
        let k = Kernel::new(dom, "constant", |_, _| 1.0).unwrap();
        let rule = gauss_legendre(64, dom).unwrap();
        let tx = apply_operator(&k, &rule, &Function::constant(1.0));
        for s in [0.0, 0.3, 1.0] {
            assert!((tx.eval(s) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn non_finite_kernel_rejected() {
        let dom = Domain::<f64>::unit();
        assert!(Kernel::new(dom, "singular", |s, t| 1.0 / (s - t)).is_err());
    }

    #[test]
    fn expansion_requires_positive_orthonormal_terms() {
        let dom = Domain::<f64>::unit();
        let sine = Function::new(|t: f64| 2f64.sqrt() * (std::f64::consts::PI * t).sin());
        let bad = SingularTriple {
            sigma: 0.0,
            u: sine.clone(),
            v: sine.clone(),
        };
        assert!(SeparableExpansion::new(dom, vec![bad]).is_err());
        let unnormalised = SingularTriple {
            sigma: 1.0,
            u: Function::new(|t: f64| (std::f64::consts::PI * t).sin()),
            v: sine,
        };
        assert!(SeparableExpansion::new(dom, vec![unnormalised]).is_err());
        assert!(SeparableExpansion::<f64>::new(dom, vec![]).is_err());
    }
}
