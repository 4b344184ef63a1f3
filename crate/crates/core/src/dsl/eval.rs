//! Evaluation of metric expressions over jets and over plain complex numbers.
//!
//! The two evaluators share branch logic so that the constant term of the jet
//! route always matches the scalar route. Integer exponents go through
//! repeated squaring (exact for the `(1 - |z|^2)^-2` patterns that dominate
//! the catalog); everything else goes through exp/log.

use num_complex::Complex64;
use thiserror::Error;

use super::parse::{BinOp, Expr, UnaryOp};
use crate::jet::{Jet, JetError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("unbound variable z{}", index + 1)]
    UnboundVariable { index: usize },
    #[error("domain error: {op} at a point where it is undefined")]
    Domain { op: &'static str },
    #[error(transparent)]
    Jet(#[from] JetError),
}

fn map_zero_const(err: JetError, op: &'static str) -> EvalError {
    match err {
        JetError::ZeroConstantTerm { .. } => EvalError::Domain { op },
        other => EvalError::Jet(other),
    }
}

/// True when the jet carries no variable dependence at all.
fn is_constant_jet(j: &Jet) -> bool {
    j.coeffs().iter().skip(1).all(|c| c.norm() == 0.0)
}

/// Exponent classification shared by both evaluators: exact small integers go
/// through `powi`, everything else through exp/log.
fn as_integer(k: Complex64) -> Option<i64> {
    if k.im == 0.0 && k.re.fract() == 0.0 && k.re.abs() <= 1e9 {
        Some(k.re as i64)
    } else {
        None
    }
}

/// Evaluate an expression to a jet. `env[k]` is the jet bound to variable
/// `z{k+1}`; all jets must share a variable layout.
pub fn eval_jet(expr: &Expr, env: &[Jet]) -> Result<Jet, EvalError> {
    let proto = env.first().ok_or(EvalError::UnboundVariable { index: 0 })?;
    let (nv, deg) = (proto.num_vars(), proto.degree());
    match expr {
        Expr::Const(v) => Ok(Jet::constant(Complex64::new(*v, 0.0), nv, deg)),
        Expr::I => Ok(Jet::constant(Complex64::new(0.0, 1.0), nv, deg)),
        Expr::Var(k) => env
            .get(*k)
            .cloned()
            .ok_or(EvalError::UnboundVariable { index: *k }),
        Expr::Unary(op, inner) => {
            let x = eval_jet(inner, env)?;
            match op {
                UnaryOp::Neg => Ok(-&x),
                UnaryOp::Conj => Ok(x.conj()),
                UnaryOp::Exp => Ok(x.exp()?),
                UnaryOp::Log => x.log().map_err(|e| map_zero_const(e, "log")),
            }
        }
        Expr::Binary(op, lhs, rhs) => {
            let a = eval_jet(lhs, env)?;
            let b = eval_jet(rhs, env)?;
            match op {
                BinOp::Add => Ok(&a + &b),
                BinOp::Sub => Ok(&a - &b),
                BinOp::Mul => Ok(a.try_mul(&b)?),
                BinOp::Div => a.try_div(&b).map_err(|e| map_zero_const(e, "division")),
                BinOp::Pow => {
                    if is_constant_jet(&b) {
                        let k = b.constant_term();
                        if let Some(n) = as_integer(k) {
                            return a.powi(n).map_err(|e| map_zero_const(e, "power"));
                        }
                        let log_a = a.log().map_err(|e| map_zero_const(e, "power"))?;
                        return Ok(log_a.scale(k).exp()?);
                    }
                    let log_a = a.log().map_err(|e| map_zero_const(e, "power"))?;
                    Ok(b.try_mul(&log_a)?.exp()?)
                }
            }
        }
    }
}

/// Integer power by repeated squaring, mirroring the jet route bit for bit in
/// structure.
fn cpowi(z: Complex64, n: i64) -> Result<Complex64, EvalError> {
    if n < 0 {
        if z.norm() == 0.0 {
            return Err(EvalError::Domain { op: "power" });
        }
        return cpowi(Complex64::new(1.0, 0.0) / z, -n);
    }
    let mut result = Complex64::new(1.0, 0.0);
    let mut base = z;
    let mut k = n;
    while k > 0 {
        if k & 1 == 1 {
            result *= base;
        }
        k >>= 1;
        if k > 0 {
            base *= base;
        }
    }
    Ok(result)
}

/// Evaluate an expression at a plain complex point. `env[k]` is the value of
/// `z{k+1}`.
pub fn eval_complex(expr: &Expr, env: &[Complex64]) -> Result<Complex64, EvalError> {
    match expr {
        Expr::Const(v) => Ok(Complex64::new(*v, 0.0)),
        Expr::I => Ok(Complex64::new(0.0, 1.0)),
        Expr::Var(k) => env
            .get(*k)
            .copied()
            .ok_or(EvalError::UnboundVariable { index: *k }),
        Expr::Unary(op, inner) => {
            let x = eval_complex(inner, env)?;
            match op {
                UnaryOp::Neg => Ok(-x),
                UnaryOp::Conj => Ok(x.conj()),
                UnaryOp::Exp => Ok(x.exp()),
                UnaryOp::Log => {
                    if x.norm() == 0.0 {
                        Err(EvalError::Domain { op: "log" })
                    } else {
                        Ok(x.ln())
                    }
                }
            }
        }
        Expr::Binary(op, lhs, rhs) => {
            let a = eval_complex(lhs, env)?;
            let b = eval_complex(rhs, env)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => Ok(a * b),
                BinOp::Div => {
                    if b.norm() == 0.0 {
                        Err(EvalError::Domain { op: "division" })
                    } else {
                        Ok(a / b)
                    }
                }
                BinOp::Pow => {
                    if let Some(n) = as_integer(b) {
                        return cpowi(a, n);
                    }
                    if a.norm() == 0.0 {
                        return Err(EvalError::Domain { op: "power" });
                    }
                    Ok((b * a.ln()).exp())
                }
            }
        }
    }
}

/// Environment of holomorphic-coordinate jets for the base point `z`,
/// embedded in a system of `num_complex` complex variables.
pub fn coordinate_env(
    z: &[Complex64],
    num_complex: usize,
    degree: usize,
) -> Result<Vec<Jet>, JetError> {
    z.iter()
        .enumerate()
        .map(|(j, &zj)| Jet::complex_coordinate(j, zj, num_complex, degree))
        .collect()
}
