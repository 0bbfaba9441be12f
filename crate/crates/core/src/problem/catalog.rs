//! Built-in test problems, addressable by string id.
//!
//! | id            | kernel                                   | x†                 |
//! |---------------|------------------------------------------|--------------------|
//! | `rank1-sine`  | `2 sin(πs) sin(πt)`                      | `√2 sin(π·)`       |
//! | `rank3-decay` | `Σ σ_j 2 sin(jπs) sin(jπt)`, σ = 1, .1, .01 | `Σ √2 sin(jπ·)` |
//! | `green-m<k>`  | `s(1−t)` for `s ≤ t`, `t(1−s)` otherwise | `√2 sin(kπ·)`      |
//! | `zero-data`   | rank-1 sine kernel                       | `0`                |
//!
//! The Green singular expansion is truncated at [`GREEN_TERMS`] terms; the
//! discarded tail satisfies `(Σ_{j>64} (jπ)^{-4})^{1/2} < 3e-6`.

use std::f64::consts::PI;

use super::{Function, Kernel, SeparableExpansion, SingularTriple, SourceRepresentation, TestProblem};
use crate::error::{Error, Result};
use crate::quadrature::Domain;
use crate::regularize::SourcePhi;
use crate::scalar::Scalar;

pub const GREEN_TERMS: usize = 64;

/// Default verification grid.
pub fn builtin_ids() -> [&'static str; 3] {
    ["rank1-sine", "rank3-decay", "green-m1"]
}

pub fn catalog<T: Scalar>(id: &str) -> Result<TestProblem<T>> {
    match id {
        "rank1-sine" => make_separable_problem(id, sine_expansion(&[T::one()])?, &[T::one()]),
        "rank3-decay" => make_separable_problem(
            id,
            sine_expansion(&[T::one(), T::lit(0.1), T::lit(0.01)])?,
            &[T::one(); 3],
        ),
        "zero-data" => make_separable_problem(id, sine_expansion(&[T::one()])?, &[T::zero()]),
        _ => match id.strip_prefix("green-m").and_then(|m| m.parse::<usize>().ok()) {
            Some(m) if m >= 1 => green_problem(m),
            _ => Err(Error::UnknownProblem(id.to_string())),
        },
    }
}

fn sine<T: Scalar>(j: usize) -> Function<T> {
    let freq = T::lit(PI * j as f64);
    let amp = T::lit(2f64.sqrt());
    Function::new(move |t: T| amp * (freq * t).sin())
}

/// `u_j = v_j = √2 sin(jπ·)` on `[0, 1]` with the given singular values.
pub fn sine_expansion<T: Scalar>(sigmas: &[T]) -> Result<SeparableExpansion<T>> {
    let terms = sigmas
        .iter()
        .enumerate()
        .map(|(j, &sigma)| SingularTriple {
            sigma,
            u: sine(j + 1),
            v: sine(j + 1),
        })
        .collect();
    SeparableExpansion::new(Domain::unit(), terms)
}

/// `x† = Σ c_j u_j`, `y = Σ c_j σ_j v_j`, kernel `Σ σ_j v_j(s) u_j(t)`.
///
/// The source representation uses `φ(λ) = λ`: `x† = T*T u` with
/// `u = Σ c_j σ_j^{-2} u_j`.
pub fn make_separable_problem<T: Scalar>(
    id: &str,
    expansion: SeparableExpansion<T>,
    coefficients: &[T],
) -> Result<TestProblem<T>> {
    if coefficients.len() != expansion.rank() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for a rank-{} expansion",
            coefficients.len(),
            expansion.rank()
        )));
    }
    let kernel = expansion.kernel("separable, analytic")?;
    let us: Vec<(T, Function<T>)> = coefficients
        .iter()
        .zip(expansion.terms())
        .map(|(&c, t)| (c, t.u.clone()))
        .collect();
    let vs: Vec<(T, Function<T>)> = coefficients
        .iter()
        .zip(expansion.terms())
        .map(|(&c, t)| (c * t.sigma, t.v.clone()))
        .collect();
    let x_dagger = Function::new(move |t| us.iter().map(|(c, u)| *c * u.eval(t)).sum());
    let y = Function::new(move |s| vs.iter().map(|(c, v)| *c * v.eval(s)).sum());
    let u_norm = coefficients
        .iter()
        .zip(expansion.terms())
        .map(|(&c, t)| (c / (t.sigma * t.sigma)).powi(2))
        .sum::<T>()
        .sqrt();
    let source = SourceRepresentation {
        phi: SourcePhi::power(T::one())?,
        u_norm,
    };
    TestProblem::new(id, kernel, x_dagger, y, Some(expansion), Some(source))
}

/// Green kernel of `−d²/ds²` with Dirichlet conditions on `[0, 1]`.
pub fn green_kernel<T: Scalar>() -> Kernel<T> {
    Kernel::new(Domain::unit(), "continuous, derivative jump on s = t", |s: T, t: T| {
        if s <= t {
            s * (T::one() - t)
        } else {
            t * (T::one() - s)
        }
    })
    .expect("Green kernel is finite")
}

/// Green kernel with `x† = √2 sin(mπ·)`, `y = (mπ)^{-2} x†`; singular system
/// `σ_j = (jπ)^{-2}`, `u_j = v_j = √2 sin(jπ·)`, truncated at 64 terms.
pub fn green_problem<T: Scalar>(m: usize) -> Result<TestProblem<T>> {
    if m == 0 {
        return Err(Error::InvalidParameter("Green problem needs m >= 1".into()));
    }
    let sigmas: Vec<T> = (1..=GREEN_TERMS).map(|j| T::lit((j as f64 * PI).powi(-2))).collect();
    let expansion = sine_expansion(&sigmas)?;
    let x_dagger = sine::<T>(m);
    let sigma_m = T::lit((m as f64 * PI).powi(-2));
    let xd = x_dagger.clone();
    let y = Function::new(move |s| sigma_m * xd.eval(s));
    // x† = T*T u with u = x† / σ_m².
    let source = SourceRepresentation {
        phi: SourcePhi::power(T::one())?,
        u_norm: T::one() / (sigma_m * sigma_m),
    };
    let svd = if m <= GREEN_TERMS { Some(expansion) } else { None };
    TestProblem::new(format!("green-m{m}"), green_kernel(), x_dagger, y, svd, source.into())
}
