//! Symmetric quadrature rules on triangles, in barycentric coordinates with
//! weights normalised to sum to one (multiply by the element area).

#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

fn orbit3(a: f64) -> [[f64; 3]; 3] {
    let b = 1.0 - 2.0 * a;
    [[a, a, b], [a, b, a], [b, a, a]]
}

impl TriangleRule {
    /// 6-point rule, exact for polynomials of degree 4.
    pub fn degree4() -> Self {
        const A1: f64 = 0.445_948_490_915_965;
        const W1: f64 = 0.223_381_589_678_011_5;
        const A2: f64 = 0.091_576_213_509_770_74;
        const W2: f64 = 0.109_951_743_655_321_87;
        let mut points = orbit3(A1).to_vec();
        points.extend(orbit3(A2));
        Self {
            points,
            weights: vec![W1, W1, W1, W2, W2, W2],
        }
    }

    /// 7-point Radon rule, exact for polynomials of degree 5.
    pub fn degree5() -> Self {
        let s15 = 15f64.sqrt();
        let a1 = (6.0 - s15) / 21.0;
        let a2 = (6.0 + s15) / 21.0;
        let w1 = (155.0 - s15) / 1200.0;
        let w2 = (155.0 + s15) / 1200.0;
        let third = 1.0 / 3.0;
        let mut points = vec![[third, third, third]];
        points.extend(orbit3(a1));
        points.extend(orbit3(a2));
        Self {
            points,
            weights: vec![9.0 / 40.0, w1, w1, w1, w2, w2, w2],
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// ∫_T L0^a L1^b L2^c / |T| = 2 a! b! c! / (a+b+c+2)!
    fn exact_monomial(a: u32, b: u32, c: u32) -> f64 {
        2.0 * factorial(a) * factorial(b) * factorial(c) / factorial(a + b + c + 2)
    }

    fn check(rule: &TriangleRule, degree: u32) {
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for a in 0..=degree {
            for b in 0..=degree - a {
                for c in 0..=degree - a - b {
                    let q: f64 = rule
                        .points
                        .iter()
                        .zip(&rule.weights)
                        .map(|(p, w)| w * p[0].powi(a as i32) * p[1].powi(b as i32) * p[2].powi(c as i32))
                        .sum();
                    assert!((q - exact_monomial(a, b, c)).abs() < 1e-15, "{a} {b} {c}");
                }
            }
        }
    }

    #[test]
    fn rules_are_exact_to_their_degree() {
        check(&TriangleRule::degree4(), 4);
        check(&TriangleRule::degree5(), 5);
    }

    #[test]
    fn degree4_rule_is_not_exact_at_degree6() {
        let r = TriangleRule::degree4();
        let q: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[0].powi(6)).sum();
        assert!((q - exact_monomial(6, 0, 0)).abs() > 1e-6);
    }
}
