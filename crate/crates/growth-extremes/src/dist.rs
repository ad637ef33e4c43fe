//! Reference distributions and goodness-of-fit statistics.
//!
//! Parameters are validated once at construction; evaluation methods are
//! then infallible, which keeps CDF closures passed to the fit statistics
//! free of error plumbing. Samplers use standard exact methods
//! (inverse CDF, Box-Muller, Marsaglia-Tsang) on top of the engine RNG.

use rand::Rng;

use crate::rng::unit_open;
use crate::special::{gamma_p, gamma_q, normal_cdf};

#[derive(Debug, thiserror::Error)]
pub enum DistError {
    #[error("parameter `{name}` must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("parameter `{name}` must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("empty sample")]
    EmptySample,
    #[error("sample contains a non-finite value")]
    NonFiniteSample,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
}

fn require_positive(name: &'static str, value: f64) -> Result<f64, DistError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(DistError::NonPositive { name, value })
    }
}

fn require_finite(name: &'static str, value: f64) -> Result<f64, DistError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(DistError::NonFinite { name, value })
    }
}

/// Frechet law on (0, inf): F(x) = exp(-(x/scale)^{-shape}).
#[derive(Debug, Clone, Copy)]
pub struct Frechet {
    pub shape: f64,
    pub scale: f64,
}

impl Frechet {
    pub fn new(shape: f64, scale: f64) -> Result<Self, DistError> {
        Ok(Self {
            shape: require_positive("shape", shape)?,
            scale: require_positive("scale", scale)?,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            (-(x / self.scale).powf(-self.shape)).exp()
        }
    }

    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u));
        self.scale * (-u.ln()).powf(-1.0 / self.shape)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(unit_open(rng))
    }
}

/// Gumbel law: F(x) = exp(-exp(-(x - location)/scale)).
#[derive(Debug, Clone, Copy)]
pub struct Gumbel {
    pub location: f64,
    pub scale: f64,
}

impl Gumbel {
    pub fn new(location: f64, scale: f64) -> Result<Self, DistError> {
        Ok(Self {
            location: require_finite("location", location)?,
            scale: require_positive("scale", scale)?,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        (-(-(x - self.location) / self.scale).exp()).exp()
    }

    pub fn quantile(&self, u: f64) -> f64 {
        debug_assert!((0.0..1.0).contains(&u));
        self.location - self.scale * (-u.ln()).ln()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(unit_open(rng))
    }
}

/// Gaussian law parametrized by mean and variance.
#[derive(Debug, Clone, Copy)]
pub struct Gaussian {
    pub mean: f64,
    pub variance: f64,
}

impl Gaussian {
    pub fn new(mean: f64, variance: f64) -> Result<Self, DistError> {
        Ok(Self {
            mean: require_finite("mean", mean)?,
            variance: require_positive("variance", variance)?,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        normal_cdf((x - self.mean) / self.variance.sqrt())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.mean + self.variance.sqrt() * std_normal(rng)
    }
}

/// Gamma law with shape and *rate* (density ~ x^{shape-1} e^{-rate x}).
#[derive(Debug, Clone, Copy)]
pub struct GammaDist {
    pub shape: f64,
    pub rate: f64,
}

impl GammaDist {
    pub fn new(shape: f64, rate: f64) -> Result<Self, DistError> {
        Ok(Self {
            shape: require_positive("shape", shape)?,
            rate: require_positive("rate", rate)?,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_p(self.shape, self.rate * x)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        sample_gamma(rng, self.shape) / self.rate
    }
}

/// Exponential law with the given rate.
#[derive(Debug, Clone, Copy)]
pub struct Exponential {
    pub rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self, DistError> {
        Ok(Self { rate: require_positive("rate", rate)? })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-self.rate * x).exp_m1()
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        crate::rng::exp_draw(rng, self.rate)
    }
}

/// One standard normal draw (Box-Muller, uncached).
pub fn std_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1 = unit_open(rng);
    let u2: f64 = rng.random();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Gamma(shape, 1) draw via Marsaglia-Tsang, with the standard power
/// boost for shape < 1.
pub fn sample_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64) -> f64 {
    debug_assert!(shape > 0.0);
    if shape < 1.0 {
        let u = unit_open(rng);
        return sample_gamma(rng, shape + 1.0) * u.powf(1.0 / shape);
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x = std_normal(rng);
        let v = (1.0 + c * x).powi(3);
        if v <= 0.0 {
            continue;
        }
        let u = unit_open(rng);
        if u < 1.0 - 0.0331 * x.powi(4) {
            return d * v;
        }
        if u.ln() < 0.5 * x * x + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}

/// Two-sided Kolmogorov-Smirnov distance between an i.i.d. sample and a
/// reference CDF: sup_x |F_n(x) - F(x)|.
pub fn ks_distance<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64, DistError> {
    if sample.is_empty() {
        return Err(DistError::EmptySample);
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(DistError::NonFiniteSample);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

#[derive(Debug, Clone, Copy)]
pub struct Chi2Result {
    pub statistic: f64,
    pub degrees: usize,
    pub p_value: f64,
}

/// Pearson chi-squared goodness of fit against fully specified expected
/// counts (degrees of freedom = cells - 1).
pub fn chi2_gof(observed: &[u64], expected: &[f64]) -> Result<Chi2Result, DistError> {
    if observed.is_empty() {
        return Err(DistError::EmptySample);
    }
    if observed.len() != expected.len() {
        return Err(DistError::LengthMismatch { left: observed.len(), right: expected.len() });
    }
    let mut stat = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        if !(e > 0.0 && e.is_finite()) {
            return Err(DistError::NonPositive { name: "expected count", value: e });
        }
        let diff = o as f64 - e;
        stat += diff * diff / e;
    }
    let degrees = observed.len() - 1;
    let p_value =
        if degrees == 0 { 1.0 } else { gamma_q(degrees as f64 / 2.0, stat / 2.0) };
    Ok(Chi2Result { statistic: stat, degrees, p_value })
}

/// Total-variation distance between two discrete laws given as
/// probability vectors over the same support.
pub fn tv_distance_discrete(p: &[f64], q: &[f64]) -> Result<f64, DistError> {
    if p.len() != q.len() {
        return Err(DistError::LengthMismatch { left: p.len(), right: q.len() });
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::replicate_rng;

    const E_INV: f64 = 0.36787944117144233;

    #[test]
    fn cdf_spot_values() {
        let fr = Frechet::new(2.0, 1.0).unwrap();
        assert!((fr.cdf(1.0) - E_INV).abs() < 1e-15);
        assert_eq!(fr.cdf(-1.0), 0.0);
        assert!((fr.quantile(E_INV) - 1.0).abs() < 1e-12);

        let gu = Gumbel::new(0.0, 1.0).unwrap();
        assert!((gu.cdf(0.0) - E_INV).abs() < 1e-15);
        assert!((gu.quantile(E_INV)).abs() < 1e-12);

        let ga = Gaussian::new(0.0, 1.0).unwrap();
        assert!((ga.cdf(1.959963984540054) - 0.975).abs() < 1e-9);
        assert!((ga.cdf(0.0) - 0.5).abs() < 1e-15);

        // Gamma(shape 2, rate 3) at 1: 1 - 4 e^{-3}.
        let gm = GammaDist::new(2.0, 3.0).unwrap();
        assert!((gm.cdf(1.0) - 0.8008517265285442).abs() < 1e-12);

        let ex = Exponential::new(2.0).unwrap();
        assert!((ex.cdf(1.0) - 0.8646647167633873).abs() < 1e-15);
    }

    #[test]
    fn parameter_validation() {
        assert!(Frechet::new(0.0, 1.0).is_err());
        assert!(Frechet::new(1.0, -2.0).is_err());
        assert!(Gumbel::new(f64::NAN, 1.0).is_err());
        assert!(Gaussian::new(0.0, 0.0).is_err());
        assert!(GammaDist::new(-1.0, 1.0).is_err());
        assert!(Exponential::new(f64::INFINITY).is_err());
    }

    #[test]
    fn frechet_log_transform_is_gumbel() {
        // If X ~ Frechet(shape, scale) then ln X ~ Gumbel(ln scale, 1/shape).
        let fr = Frechet::new(2.5, 3.0).unwrap();
        let gu = Gumbel::new(3.0f64.ln(), 1.0 / 2.5).unwrap();
        for x in [0.5, 1.0, 2.0, 5.0, 20.0] {
            assert!((fr.cdf(x) - gu.cdf(x.ln())).abs() < 1e-14, "at {x}");
        }
    }

    #[test]
    fn ks_on_exact_quantile_grid_is_small() {
        let ex = Exponential::new(1.0).unwrap();
        let n = 1000;
        let grid: Vec<f64> =
            (0..n).map(|i| -(1.0 - (i as f64 + 0.5) / n as f64).ln()).collect();
        let d = ks_distance(&grid, |x| ex.cdf(x)).unwrap();
        assert!(d <= 0.5 / n as f64 + 1e-12, "d = {d}");
    }

    #[test]
    fn ks_degenerate_sample() {
        let sample = vec![0.5; 100];
        let d = ks_distance(&sample, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!(ks_distance(&[], |x| x).is_err());
        assert!(ks_distance(&[f64::NAN], |x| x).is_err());
    }

    #[test]
    fn samplers_match_their_cdfs() {
        let n = 20_000;
        let mut rng = replicate_rng(77, 0);
        let fr = Frechet::new(1.5, 2.0).unwrap();
        let gu = Gumbel::new(-1.0, 0.5).unwrap();
        let ga = Gaussian::new(2.0, 4.0).unwrap();
        let gm = GammaDist::new(2.5, 1.5).unwrap();
        let gs = GammaDist::new(0.5, 1.0).unwrap();
        let checks: Vec<(&str, Vec<f64>, Box<dyn Fn(f64) -> f64>)> = vec![
            ("frechet", (0..n).map(|_| fr.sample(&mut rng)).collect(), Box::new(move |x| fr.cdf(x))),
            ("gumbel", (0..n).map(|_| gu.sample(&mut rng)).collect(), Box::new(move |x| gu.cdf(x))),
            ("gaussian", (0..n).map(|_| ga.sample(&mut rng)).collect(), Box::new(move |x| ga.cdf(x))),
            ("gamma", (0..n).map(|_| gm.sample(&mut rng)).collect(), Box::new(move |x| gm.cdf(x))),
            ("gamma_small_shape", (0..n).map(|_| gs.sample(&mut rng)).collect(), Box::new(move |x| gs.cdf(x))),
        ];
        for (name, sample, cdf) in checks {
            let d = ks_distance(&sample, cdf.as_ref()).unwrap();
            assert!(d < 0.02, "{name}: KS {d}");
        }
    }

    #[test]
    fn chi2_closed_forms() {
        // Perfect fit: statistic 0, p = 1.
        let r = chi2_gof(&[10, 20, 30], &[10.0, 20.0, 30.0]).unwrap();
        assert!(r.statistic.abs() < 1e-12 && (r.p_value - 1.0).abs() < 1e-12);
        // df = 2: p = exp(-stat/2) exactly.
        let r = chi2_gof(&[60, 30, 30], &[50.0, 35.0, 35.0]).unwrap();
        let want_stat = 100.0 / 50.0 + 25.0 / 35.0 + 25.0 / 35.0;
        assert!((r.statistic - want_stat).abs() < 1e-12);
        assert!((r.p_value - (-want_stat / 2.0).exp()).abs() < 1e-12);
        assert!(chi2_gof(&[1], &[1.0, 2.0]).is_err());
        assert!(chi2_gof(&[1, 2], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn tv_distance_examples() {
        let d = tv_distance_discrete(&[0.5, 0.5], &[0.9, 0.1]).unwrap();
        assert!((d - 0.4).abs() < 1e-15);
        assert_eq!(tv_distance_discrete(&[1.0], &[1.0]).unwrap(), 0.0);
        assert!(tv_distance_discrete(&[1.0], &[0.5, 0.5]).is_err());
    }
}
