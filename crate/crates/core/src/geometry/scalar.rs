//! Scalar utilities: the Schwarzian derivative and the genus-indexed
//! fiber-norm bound.

use num_complex::Complex64;

use super::GeometryError;
use crate::dsl::eval::{coordinate_env, eval_jet};
use crate::dsl::parse::{BinOp, Expr};

/// Schwarzian derivative `S(f) = (f''/f')' - (1/2)(f''/f')^2
/// = f'''/f' - (3/2)(f''/f')^2` of a one-variable expression at `z`,
/// as the scalar coefficient (the `dz^2` factor dropped). Vanishes exactly
/// on Mobius transformations.
pub fn schwarzian(f: &Expr, z: Complex64) -> Result<Complex64, GeometryError> {
    let env = coordinate_env(&[z], 1, 3)?;
    let jet = eval_jet(f, &env)?;
    let f1 = jet.wirtinger(&[1], &[0])?;
    let f2 = jet.wirtinger(&[2], &[0])?;
    let f3 = jet.wirtinger(&[3], &[0])?;
    if f1.norm() < 1e-12 {
        return Err(GeometryError::VanishingDerivative(f1.norm()));
    }
    let ratio = f2 / f1;
    Ok(f3 / f1 - 1.5 * ratio * ratio)
}

/// AST of the Mobius transformation `(a z + b) / (c z + d)` with complex
/// coefficients.
pub fn mobius_expr(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Expr {
    let num = Expr::Binary(
        BinOp::Add,
        Box::new(Expr::Binary(
            BinOp::Mul,
            Box::new(complex_const(a)),
            Box::new(Expr::Var(0)),
        )),
        Box::new(complex_const(b)),
    );
    let den = Expr::Binary(
        BinOp::Add,
        Box::new(Expr::Binary(
            BinOp::Mul,
            Box::new(complex_const(c)),
            Box::new(Expr::Var(0)),
        )),
        Box::new(complex_const(d)),
    );
    Expr::Binary(BinOp::Div, Box::new(num), Box::new(den))
}

fn complex_const(c: Complex64) -> Expr {
    Expr::Binary(
        BinOp::Add,
        Box::new(Expr::Const(c.re)),
        Box::new(Expr::Binary(
            BinOp::Mul,
            Box::new(Expr::Const(c.im)),
            Box::new(Expr::I),
        )),
    )
}

/// Fiber-norm bound for the embedded deformation space over a closed surface
/// of the given genus: a sup-norm ball of radius 3/2 inside a hyperbolic
/// surface of area `2 pi (2g - 2)` gives the squared-sup times area bound
/// `(3/2)^2 * 2 pi (2g - 2) = 9 pi (g - 1)` in the fiberwise L2 norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NehariBound {
    pub genus: u32,
    /// Sup-norm radius of the embedding.
    pub sup_bound: f64,
    /// Hyperbolic area `2 pi (2g - 2)`.
    pub area: f64,
    /// L2 radius `sup_bound^2 * area = 9 pi (g - 1)`.
    pub radius: f64,
}

pub fn nehari_l2_radius(genus: u32) -> Result<NehariBound, GeometryError> {
    if genus < 2 {
        return Err(GeometryError::GenusTooSmall(genus));
    }
    let sup_bound = 1.5f64;
    let area = 2.0 * std::f64::consts::PI * (2.0 * f64::from(genus) - 2.0);
    // The radius is computed literally as the proof chain's product, so the
    // chain identity holds bit for bit.
    let radius = sup_bound * sup_bound * area;
    Ok(NehariBound { genus, sup_bound, area, radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse::parse;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mobius_has_zero_schwarzian() {
        let f = parse("(2*z1 + 1)/(z1 + 1)").unwrap();
        let s = schwarzian(&f, c(0.3, 0.0)).unwrap();
        assert!(s.norm() < 1e-13, "S = {s}");
    }

    #[test]
    fn schwarzian_of_exp_is_minus_half() {
        let f = parse("exp(z1)").unwrap();
        for z in [c(0.0, 0.0), c(1.2, -0.7), c(-0.5, 0.3)] {
            let s = schwarzian(&f, z).unwrap();
            assert_relative_eq!(s.re, -0.5, epsilon = 1e-12);
            assert!(s.im.abs() < 1e-12);
        }
    }

    #[test]
    fn schwarzian_of_square_at_one() {
        let f = parse("z1^2").unwrap();
        let s = schwarzian(&f, c(1.0, 0.0)).unwrap();
        assert_relative_eq!(s.re, -1.5, epsilon = 1e-12);
    }

    #[test]
    fn vanishing_derivative_is_an_error() {
        let f = parse("z1^2").unwrap();
        assert!(matches!(
            schwarzian(&f, c(0.0, 0.0)),
            Err(GeometryError::VanishingDerivative(_))
        ));
    }

    #[test]
    fn mobius_builder_round_trip() {
        let f = mobius_expr(c(2.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0));
        let s = schwarzian(&f, c(0.3, 0.0)).unwrap();
        assert!(s.norm() < 1e-13);
    }

    #[test]
    fn bound_values() {
        let b = nehari_l2_radius(2).unwrap();
        assert_eq!(b.radius, 9.0 * PI);
        assert_eq!(b.sup_bound, 1.5);
        assert_relative_eq!(b.area, 4.0 * PI, epsilon = 0.0);

        let b3 = nehari_l2_radius(3).unwrap();
        assert_eq!(b3.radius, 18.0 * PI);

        assert!(matches!(
            nehari_l2_radius(1),
            Err(GeometryError::GenusTooSmall(1))
        ));
        assert!(matches!(
            nehari_l2_radius(0),
            Err(GeometryError::GenusTooSmall(0))
        ));
    }

    #[test]
    fn bound_chain_is_exact_for_small_genus() {
        for g in 2..30u32 {
            let b = nehari_l2_radius(g).unwrap();
            let direct = 9.0 * PI * (f64::from(g) - 1.0);
            assert_relative_eq!(b.radius, direct, max_relative = 1e-15);
            assert_eq!(b.radius, b.sup_bound * b.sup_bound * b.area);
        }
    }
}
