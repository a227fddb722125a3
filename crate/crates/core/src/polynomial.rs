//! C-monic polynomials `F(x) = x^n + a_1 x + ... + a_{n-1} x^{n-1}` and the
//! growth estimates used throughout the bound.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of sample points for the growth-property checks.
pub const DEFAULT_PROPERTY_SAMPLES: usize = 4096;

/// Smallest coefficient bound accepted at construction.
pub const MIN_COEFF_BOUND: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    CMonic { coeff_bound: f64 },
    Raw,
}

/// A polynomial with an optional C-monic certificate.
///
/// C-monic polynomials have an implicit leading coefficient 1 and an
/// implicit zero constant term, so those two invariants cannot be broken.
/// The raw constructor exists only for oracle systems such as `x^3 - x`;
/// bound and verifier code refuses it.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSpec {
    kind: Kind,
    /// Full ascending coefficient list `c_0 ... c_deg`.
    full: Vec<f64>,
}

impl PolynomialSpec {
    /// `coeffs` holds `a_1 ... a_{n-1}`.
    pub fn c_monic(degree: usize, coeff_bound: f64, coeffs: &[f64]) -> Result<Self> {
        let mut problems = Vec::new();
        if degree < 2 {
            problems.push(format!("degree must be at least 2, got {degree}"));
        }
        if !(coeff_bound.is_finite() && coeff_bound >= MIN_COEFF_BOUND) {
            problems.push(format!("C must be at least {MIN_COEFF_BOUND}, got {coeff_bound}"));
        }
        if degree >= 1 && coeffs.len() != degree - 1 {
            problems.push(format!(
                "expected {} coefficients a1..a{}, got {}",
                degree.saturating_sub(1),
                degree.saturating_sub(1),
                coeffs.len()
            ));
        }
        for (i, a) in coeffs.iter().enumerate() {
            if !a.is_finite() || a.abs() >= coeff_bound {
                problems.push(format!("|a{}| = {} must be < C = {}", i + 1, a.abs(), coeff_bound));
            }
        }
        if !problems.is_empty() {
            return Err(Error::InvalidPolynomial(problems.join("; ")));
        }
        let mut full = Vec::with_capacity(degree + 1);
        full.push(0.0);
        full.extend_from_slice(coeffs);
        full.push(1.0);
        Ok(Self { kind: Kind::CMonic { coeff_bound }, full })
    }

    /// `x^n + a_1 x`, the simplest member of each family.
    pub fn monomial_plus_linear(degree: usize, coeff_bound: f64, a1: f64) -> Result<Self> {
        let mut coeffs = vec![0.0; degree.saturating_sub(1)];
        if let Some(c) = coeffs.first_mut() {
            *c = a1;
        }
        Self::c_monic(degree, coeff_bound, &coeffs)
    }

    /// Arbitrary real coefficients `c_0 ... c_d` in ascending order. Not C-monic.
    pub fn raw(coeffs: &[f64]) -> Result<Self> {
        if let Some(bad) = coeffs.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidPolynomial(format!("coefficient c{bad} is not finite")));
        }
        let mut full = coeffs.to_vec();
        while full.len() > 1 && full.last() == Some(&0.0) {
            full.pop();
        }
        if full.is_empty() {
            full.push(0.0);
        }
        Ok(Self { kind: Kind::Raw, full })
    }

    /// The zero polynomial: turns the system into a linear center.
    pub fn zero() -> Self {
        Self { kind: Kind::Raw, full: vec![0.0] }
    }

    pub fn degree(&self) -> usize {
        self.full.len() - 1
    }

    /// `C` for C-monic polynomials.
    pub fn coeff_bound(&self) -> Option<f64> {
        match self.kind {
            Kind::CMonic { coeff_bound } => Some(coeff_bound),
            Kind::Raw => None,
        }
    }

    pub fn is_raw(&self) -> bool {
        matches!(self.kind, Kind::Raw)
    }

    /// C-monic of even degree.
    pub fn is_paper_mode(&self) -> bool {
        !self.is_raw() && self.degree() % 2 == 0
    }

    /// Linear coefficient `a_1`.
    pub fn a1(&self) -> f64 {
        self.full.get(1).copied().unwrap_or(0.0)
    }

    /// `a_1 ... a_{n-1}` (C-monic) or `c_1 ... c_d` (raw).
    pub fn coeffs(&self) -> &[f64] {
        match self.kind {
            Kind::CMonic { .. } => &self.full[1..self.full.len() - 1],
            Kind::Raw => &self.full[..],
        }
    }

    /// Full ascending coefficient list, including constant and leading terms.
    pub fn ascending(&self) -> &[f64] {
        &self.full
    }

    pub fn eval(&self, x: f64) -> f64 {
        horner(&self.full, x)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.full
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Ascending coefficients of `F'`.
    pub fn deriv(&self) -> Vec<f64> {
        if self.full.len() == 1 {
            return vec![0.0];
        }
        self.full
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| i as f64 * c)
            .collect()
    }

    pub fn deriv_eval(&self, x: f64) -> f64 {
        // Horner on the derivative without allocating.
        let mut acc = 0.0;
        for (i, &c) in self.full.iter().enumerate().skip(1).rev() {
            acc = acc * x + i as f64 * c;
        }
        acc
    }

    /// Tail `O(r, phi) = sum_{i>=2} a_i (r cos phi)^{i-1}` of `F(x)/x`.
    pub fn tail(&self, x: f64) -> f64 {
        if self.full.len() < 3 {
            return 0.0;
        }
        horner(&self.full[2..], x) * x
    }

    /// Uniform random C-monic polynomial with a prescribed `a_1`.
    pub fn random_c_monic<R: Rng + ?Sized>(
        rng: &mut R,
        degree: usize,
        coeff_bound: f64,
        a1: f64,
    ) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(degree.saturating_sub(1));
        if degree >= 2 {
            coeffs.push(a1);
        }
        for _ in 2..degree {
            let a = loop {
                let a = rng.gen_range(-coeff_bound..coeff_bound);
                if a.abs() < coeff_bound {
                    break a;
                }
            };
            coeffs.push(a);
        }
        Self::c_monic(degree, coeff_bound, &coeffs)
    }
}

fn horner(ascending: &[f64], x: f64) -> f64 {
    ascending.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// JSON form. C-monic polynomials use `{"n", "C", "coeffs"}`; raw ones
/// carry their full ascending list under `raw_coeffs`.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PolynomialJson {
    CMonic {
        n: usize,
        #[serde(rename = "C")]
        c: f64,
        coeffs: Vec<f64>,
    },
    Raw {
        raw_coeffs: Vec<f64>,
    },
}

impl Serialize for PolynomialSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let json = match self.kind {
            Kind::CMonic { coeff_bound } => PolynomialJson::CMonic {
                n: self.degree(),
                c: coeff_bound,
                coeffs: self.coeffs().to_vec(),
            },
            Kind::Raw => PolynomialJson::Raw { raw_coeffs: self.full.clone() },
        };
        json.serialize(s)
    }
}

impl<'de> Deserialize<'de> for PolynomialSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match PolynomialJson::deserialize(d)? {
            PolynomialJson::CMonic { n, c, coeffs } => {
                Self::c_monic(n, c, &coeffs).map_err(serde::de::Error::custom)
            }
            PolynomialJson::Raw { raw_coeffs } => {
                Self::raw(&raw_coeffs).map_err(serde::de::Error::custom)
            }
        }
    }
}

/// The three growth properties of C-monic polynomials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthProperty {
    /// `max_{[0,X]} |F| <= 2 X^n` for `X >= C + 1`.
    ValueOnInterval,
    /// `max_{[0,X]} |F'| <= C n^2 X^{n-1}` for `X >= 1`.
    DerivativeOnInterval,
    /// `|F(z)| <= 2 C |z|` for `|z| <= X <= 1/2`.
    ComplexDisc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyMargin {
    pub property: GrowthProperty,
    /// Largest observed `LHS / RHS`; at most 1 when the property holds.
    pub worst_ratio: f64,
    /// Sample point (real part, imaginary part) where the worst ratio occurred.
    pub witness: (f64, f64),
    pub samples: usize,
}

impl PropertyMargin {
    pub fn holds(&self) -> bool {
        self.worst_ratio <= 1.0
    }
}

/// Worst `LHS / RHS` ratio of one growth property over a uniform grid.
///
/// For [`GrowthProperty::ComplexDisc`], `x_max` is the disc radius and the
/// samples are spread over eight concentric circles out to that radius.
pub fn check_growth_property(
    f: &PolynomialSpec,
    property: GrowthProperty,
    x_max: f64,
    samples: usize,
) -> Result<PropertyMargin> {
    let c = f
        .coeff_bound()
        .ok_or(Error::NotPaperMode("growth-property check"))?;
    let n = f.degree() as f64;
    let samples = samples.max(2);
    let mut worst = (f64::NEG_INFINITY, (0.0, 0.0));
    let mut consider = |ratio: f64, at: (f64, f64)| {
        if ratio > worst.0 {
            worst = (ratio, at);
        }
    };
    match property {
        GrowthProperty::ValueOnInterval => {
            if !(x_max >= c + 1.0) {
                return Err(Error::Domain(format!("property 1 needs X >= C + 1 = {}, got {x_max}", c + 1.0)));
            }
            let rhs = 2.0 * x_max.powf(n);
            for k in 0..samples {
                let x = x_max * k as f64 / (samples - 1) as f64;
                consider(f.eval(x).abs() / rhs, (x, 0.0));
            }
        }
        GrowthProperty::DerivativeOnInterval => {
            if !(x_max >= 1.0) {
                return Err(Error::Domain(format!("property 2 needs X >= 1, got {x_max}")));
            }
            let rhs = c * n * n * x_max.powf(n - 1.0);
            for k in 0..samples {
                let x = x_max * k as f64 / (samples - 1) as f64;
                consider(f.deriv_eval(x).abs() / rhs, (x, 0.0));
            }
        }
        GrowthProperty::ComplexDisc => {
            if !(x_max > 0.0 && x_max <= 0.5) {
                return Err(Error::Domain(format!("property 3 needs 0 < |z| <= 1/2, got {x_max}")));
            }
            const RINGS: usize = 8;
            let per_ring = (samples / RINGS).max(1);
            for ring in 0..RINGS {
                let radius = x_max * 0.5f64.powi(ring as i32);
                for k in 0..per_ring {
                    let theta = std::f64::consts::TAU * k as f64 / per_ring as f64;
                    let z = Complex64::from_polar(radius, theta);
                    consider(f.eval_complex(z).norm() / (2.0 * c * radius), (z.re, z.im));
                }
            }
        }
    }
    Ok(PropertyMargin { property, worst_ratio: worst.0, witness: worst.1, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn quartic_minus_x() -> PolynomialSpec {
        PolynomialSpec::c_monic(4, 4.0, &[-1.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn eval_examples() {
        let sq = PolynomialSpec::c_monic(2, 4.0, &[0.0]).unwrap();
        assert_eq!(sq.eval(0.0), 0.0);
        let mono = PolynomialSpec::c_monic(6, 4.0, &[0.0; 5]).unwrap();
        assert_eq!(mono.eval(1.0), 1.0);
        assert_eq!(quartic_minus_x().eval(2.0), 14.0);
    }

    #[test]
    fn complex_eval_examples() {
        let sq = PolynomialSpec::c_monic(2, 4.0, &[0.0]).unwrap();
        let v = sq.eval_complex(Complex64::i());
        assert_eq!(v, Complex64::new(-1.0, 0.0));
        let v = sq.eval_complex(Complex64::new(0.3, 0.0));
        assert_eq!(v.re, sq.eval(0.3));
        assert_eq!(v.im, 0.0);

        let f = PolynomialSpec::c_monic(4, 4.0, &[3.0, 0.0, 0.0]).unwrap();
        for k in 0..64 {
            let z = Complex64::from_polar(0.4, std::f64::consts::TAU * k as f64 / 64.0);
            assert!(f.eval_complex(z).norm() <= 3.2);
        }
    }

    #[test]
    fn derivative_examples() {
        let sq = PolynomialSpec::c_monic(2, 4.0, &[0.0]).unwrap();
        assert_eq!(sq.deriv(), vec![0.0, 2.0]);
        assert_eq!(sq.deriv_eval(3.0), 6.0);
        let mono = PolynomialSpec::c_monic(5, 4.0, &[0.0; 4]).unwrap();
        assert_eq!(mono.deriv_eval(1.0), 5.0);
        assert_eq!(quartic_minus_x().deriv_eval(1.0), 3.0);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = [2usize, 4, 6][rng.gen_range(0..3)];
            let f = PolynomialSpec::random_c_monic(&mut rng, n, 4.0, 0.7).unwrap();
            for _ in 0..20 {
                let x: f64 = rng.gen_range(-2.0..2.0);
                let h = 1e-5 * x.abs().max(1.0);
                let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
                let exact = f.deriv_eval(x);
                let scale = exact.abs().max(1.0);
                assert!((fd - exact).abs() <= 1e-6 * scale, "x={x} fd={fd} exact={exact}");
            }
        }
    }

    #[test]
    fn construction_rejects_large_coefficients() {
        let err = PolynomialSpec::c_monic(4, 4.0, &[1.0, 4.0, 0.0]).unwrap_err();
        assert!(err.to_string().contains("|a2|"));
        assert!(PolynomialSpec::c_monic(4, 1.5, &[0.0; 3]).is_err());
        assert!(PolynomialSpec::c_monic(1, 4.0, &[]).is_err());
        assert!(PolynomialSpec::c_monic(4, 4.0, &[0.0; 2]).is_err());
    }

    #[test]
    fn raw_mode_is_not_paper_mode() {
        let cubic = PolynomialSpec::raw(&[0.0, -1.0, 0.0, 1.0]).unwrap();
        assert!(cubic.is_raw());
        assert!(!cubic.is_paper_mode());
        assert_eq!(cubic.eval(2.0), 6.0);
        let odd = PolynomialSpec::c_monic(3, 4.0, &[-1.0, 0.0]).unwrap();
        assert!(!odd.is_paper_mode());
        assert!(quartic_minus_x().is_paper_mode());
        assert_eq!(PolynomialSpec::zero().eval(3.0), 0.0);
        assert_eq!(PolynomialSpec::zero().deriv_eval(3.0), 0.0);
    }

    #[test]
    fn tail_is_f_over_x_minus_a1() {
        let f = PolynomialSpec::c_monic(4, 4.0, &[1.5, -2.0, 3.0]).unwrap();
        let x = 0.3;
        let expected = f.eval(x) / x - 1.5;
        assert!((f.tail(x) - expected).abs() < 1e-14);
    }

    #[test]
    fn growth_property_examples() {
        let sq = PolynomialSpec::c_monic(2, 4.0, &[0.0]).unwrap();
        let m = check_growth_property(&sq, GrowthProperty::ValueOnInterval, 5.0, 101).unwrap();
        assert_eq!(m.worst_ratio, 0.5);

        for n in [2usize, 4, 6] {
            let mono = PolynomialSpec::c_monic(n, 4.0, &vec![0.0; n - 1]).unwrap();
            let m = check_growth_property(&mono, GrowthProperty::DerivativeOnInterval, 1.0, 101).unwrap();
            assert!((m.worst_ratio - 1.0 / (4.0 * n as f64)).abs() < 1e-15);
        }
    }

    #[test]
    fn growth_property_preconditions() {
        let f = quartic_minus_x();
        assert!(matches!(
            check_growth_property(&f, GrowthProperty::ValueOnInterval, 4.0, 10),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            check_growth_property(&f, GrowthProperty::DerivativeOnInterval, 0.5, 10),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            check_growth_property(&f, GrowthProperty::ComplexDisc, 0.6, 10),
            Err(Error::Domain(_))
        ));
        let raw = PolynomialSpec::raw(&[0.0, 1.0]).unwrap();
        assert!(check_growth_property(&raw, GrowthProperty::ComplexDisc, 0.5, 10).is_err());
    }

    #[test]
    fn random_polynomials_satisfy_all_growth_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let n = [2usize, 4, 6][rng.gen_range(0..3)];
            let a1 = rng.gen_range(-3.99..3.99);
            let f = PolynomialSpec::random_c_monic(&mut rng, n, 4.0, a1).unwrap();
            for (prop, x) in [
                (GrowthProperty::ValueOnInterval, 5.0),
                (GrowthProperty::DerivativeOnInterval, 1.0),
                (GrowthProperty::DerivativeOnInterval, 3.0),
                (GrowthProperty::ComplexDisc, 0.5),
            ] {
                let m = check_growth_property(&f, prop, x, 1024).unwrap();
                assert!(m.holds(), "{prop:?} failed for {f:?}: {}", m.worst_ratio);
            }
        }
    }

    #[test]
    fn json_shape() {
        let f = PolynomialSpec::c_monic(4, 4.0, &[1.0, -2.0, 0.5]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"n":4,"C":4.0,"coeffs":[1.0,-2.0,0.5]}"#);
        let back: PolynomialSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let raw = PolynomialSpec::raw(&[0.0, -1.0, 0.0, 1.0]).unwrap();
        let back: PolynomialSpec = serde_json::from_str(&serde_json::to_string(&raw).unwrap()).unwrap();
        assert_eq!(back, raw);
        assert!(serde_json::from_str::<PolynomialSpec>(r#"{"n":2,"C":4.0,"coeffs":[5.0]}"#).is_err());
    }

    proptest::proptest! {
        #[test]
        fn zero_at_origin_and_real_axis_agreement(
            a in proptest::collection::vec(-3.99f64..3.99, 1..8),
            x in -3.0f64..3.0,
        ) {
            let f = PolynomialSpec::c_monic(a.len() + 1, 4.0, &a).unwrap();
            proptest::prop_assert_eq!(f.eval(0.0), 0.0);
            let re = f.eval(x);
            let z = f.eval_complex(Complex64::new(x, 0.0));
            proptest::prop_assert!((z.re - re).abs() <= 1e-14 * re.abs().max(1.0));
            proptest::prop_assert_eq!(z.im, 0.0);
        }
    }
}
