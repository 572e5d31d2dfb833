//! Samplers for the elliptical model X = θ + v·ΓW, the four canonical
//! simulation settings, covariance constructors and radial-law moments.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{ChiSquared as ChiSquaredDist, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sample::Sample;

/// Distribution of the radial mixing variable v in X = θ + v·ΓW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RadialLaw {
    /// v ≡ 1 (multivariate normal observations).
    Normal,
    /// v² = df/χ²_df (multivariate t with `df` degrees of freedom; df > 2
    /// so the covariance is finite).
    T { df: f64 },
    /// v = 1 with probability 1−γ and v = σ with probability γ
    /// (two-point scale mixture of normals).
    Mixture { gamma: f64, sigma: f64 },
}

impl RadialLaw {
    pub fn t(df: f64) -> Result<Self> {
        if !(df > 2.0) {
            return Err(invalid(format!("t radial law needs df > 2, got {df}")));
        }
        Ok(RadialLaw::T { df })
    }

    pub fn mixture(gamma: f64, sigma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(invalid(format!("mixture weight must be in (0,1), got {gamma}")));
        }
        if !(sigma > 0.0) {
            return Err(invalid(format!("mixture scale must be positive, got {sigma}")));
        }
        Ok(RadialLaw::Mixture { gamma, sigma })
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            RadialLaw::Normal => Ok(()),
            RadialLaw::T { df } => RadialLaw::t(df).map(|_| ()),
            RadialLaw::Mixture { gamma, sigma } => RadialLaw::mixture(gamma, sigma).map(|_| ()),
        }
    }

    /// Draw one mixing value v.
    pub(crate) fn draw(&self, rng: &mut ChaCha12Rng) -> f64 {
        match *self {
            RadialLaw::Normal => 1.0,
            RadialLaw::T { df } => {
                let chi = ChiSquaredDist::new(df).expect("validated df");
                (df / chi.sample(rng)).sqrt()
            }
            RadialLaw::Mixture { gamma, sigma } => {
                let u: f64 = rng.random();
                if u < gamma {
                    sigma
                } else {
                    1.0
                }
            }
        }
    }
}

impl std::fmt::Display for RadialLaw {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RadialLaw::Normal => write!(f, "normal"),
            RadialLaw::T { df } => write!(f, "t({df})"),
            RadialLaw::Mixture { gamma, sigma } => write!(f, "MN({gamma},{sigma})"),
        }
    }
}

/// Covariance matrix specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CovarianceSpec {
    /// Σ_ij = ρ^{|i−j|}.
    Ar1 { rho: f64, p: usize },
    Identity { p: usize },
    /// Explicit symmetric positive-definite matrix (row major).
    Custom { matrix: Vec<Vec<f64>> },
}

impl CovarianceSpec {
    pub fn p(&self) -> usize {
        match self {
            CovarianceSpec::Ar1 { p, .. } | CovarianceSpec::Identity { p } => *p,
            CovarianceSpec::Custom { matrix } => matrix.len(),
        }
    }
}

/// A realized covariance: the matrix, a factor Γ with ΓΓᵀ = Σ and the
/// squared-trace of the implied shape matrix R = D^{-1/2} Σ D^{-1/2}.
#[derive(Debug, Clone)]
pub struct Covariance {
    spec: CovarianceSpec,
    sigma: Array2<f64>,
    factor: Array2<f64>,
    tr_r_sq: f64,
}

impl Covariance {
    pub fn sigma(&self) -> &Array2<f64> {
        &self.sigma
    }

    pub fn factor(&self) -> &Array2<f64> {
        &self.factor
    }

    pub fn tr_r_sq(&self) -> f64 {
        self.tr_r_sq
    }

    pub fn p(&self) -> usize {
        self.sigma.nrows()
    }

    /// Diagonal of Σ (the d_j² scale entries of the model).
    pub fn diagonal(&self) -> Array1<f64> {
        self.sigma.diag().to_owned()
    }

    pub fn spec(&self) -> &CovarianceSpec {
        &self.spec
    }
}

/// Build Σ, a Cholesky-type factor and tr(R²) from a specification.
pub fn make_covariance(spec: &CovarianceSpec) -> Result<Covariance> {
    let p = spec.p();
    if p < 2 {
        return Err(invalid("covariance dimension must be at least 2"));
    }
    let sigma = match spec {
        CovarianceSpec::Ar1 { rho, p } => {
            if !(rho.abs() < 1.0) {
                return Err(invalid(format!("ar1 correlation must satisfy |rho| < 1, got {rho}")));
            }
            let mut s = Array2::zeros((*p, *p));
            for i in 0..*p {
                for j in 0..*p {
                    s[[i, j]] = rho.powi((i as i32 - j as i32).abs());
                }
            }
            s
        }
        CovarianceSpec::Identity { p } => Array2::eye(*p),
        CovarianceSpec::Custom { matrix } => {
            let mut s = Array2::zeros((p, p));
            for (i, row) in matrix.iter().enumerate() {
                if row.len() != p {
                    return Err(invalid("custom covariance matrix is not square"));
                }
                for (j, v) in row.iter().enumerate() {
                    if !v.is_finite() {
                        return Err(invalid("custom covariance has non-finite entries"));
                    }
                    s[[i, j]] = *v;
                }
            }
            for i in 0..p {
                for j in 0..i {
                    if (s[[i, j]] - s[[j, i]]).abs() > 1e-10 * s[[i, i]].abs().max(1.0) {
                        return Err(invalid("custom covariance is not symmetric"));
                    }
                }
            }
            s
        }
    };
    let factor = match spec {
        CovarianceSpec::Ar1 { rho, p } => {
            // closed-form lower factor of the AR(1) correlation matrix
            let c = (1.0 - rho * rho).sqrt();
            let mut l = Array2::zeros((*p, *p));
            for i in 0..*p {
                l[[i, 0]] = rho.powi(i as i32);
                for j in 1..=i {
                    l[[i, j]] = c * rho.powi((i - j) as i32);
                }
            }
            l
        }
        CovarianceSpec::Identity { p } => Array2::eye(*p),
        CovarianceSpec::Custom { .. } => cholesky_lower(&sigma)?,
    };
    let mut tr_r_sq = 0.0;
    for i in 0..p {
        let di = sigma[[i, i]];
        if !(di > 0.0) {
            return Err(invalid("covariance has a non-positive diagonal entry"));
        }
        for j in 0..p {
            let v = sigma[[i, j]];
            tr_r_sq += v * v / (di * sigma[[j, j]]);
        }
    }
    Ok(Covariance {
        spec: spec.clone(),
        sigma,
        factor,
        tr_r_sq,
    })
}

/// Plain Cholesky factorization; errors if the matrix is not positive
/// definite.
fn cholesky_lower(a: &Array2<f64>) -> Result<Array2<f64>> {
    let p = a.nrows();
    let mut l: Array2<f64> = Array2::zeros((p, p));
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[[i, j]];
            for k in 0..j {
                sum -= l[[i, k]] * l[[j, k]];
            }
            if i == j {
                if sum <= 0.0 {
                    return Err(invalid(
                        "custom covariance is not positive definite (Cholesky failed)",
                    ));
                }
                l[[i, j]] = sum.sqrt();
            } else {
                l[[i, j]] = sum / l[[j, j]];
            }
        }
    }
    Ok(l)
}

/// Sparse mean-shift signal θ = (κ, …, κ, 0, …, 0) with κ = √(δ/s) on the
/// first `s` coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignalSpec {
    pub delta: f64,
    pub s: usize,
}

impl SignalSpec {
    pub fn null() -> Self {
        SignalSpec { delta: 0.0, s: 0 }
    }

    pub fn new(delta: f64, s: usize) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(invalid(format!("signal energy must be >= 0, got {delta}")));
        }
        if delta > 0.0 && s == 0 {
            return Err(invalid("a positive signal needs s >= 1 nonzero coordinates"));
        }
        Ok(SignalSpec { delta, s })
    }

    pub fn kappa(&self) -> f64 {
        if self.delta == 0.0 || self.s == 0 {
            0.0
        } else {
            (self.delta / self.s as f64).sqrt()
        }
    }

    pub fn theta(&self, p: usize) -> Result<Array1<f64>> {
        if self.s > p {
            return Err(invalid(format!(
                "signal support s={} exceeds dimension p={p}",
                self.s
            )));
        }
        let mut theta = Array1::zeros(p);
        let kappa = self.kappa();
        for j in 0..self.s {
            theta[j] = kappa;
        }
        Ok(theta)
    }
}

/// The four canonical simulation settings, all with Σ_ij = 0.5^{|i−j|}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Setting {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
    #[serde(rename = "iii")]
    III,
    #[serde(rename = "iv")]
    IV,
}

impl Setting {
    pub fn law(self) -> RadialLaw {
        match self {
            Setting::I => RadialLaw::Normal,
            Setting::II => RadialLaw::T { df: 4.0 },
            // the mixture arguments are read as (weight, scale) in both the
            // setting list and the mixture definition; see the module docs
            Setting::III => RadialLaw::Mixture { gamma: 0.8, sigma: 3.0 },
            Setting::IV => RadialLaw::Mixture { gamma: 0.2, sigma: 3.0 },
        }
    }
}

impl std::fmt::Display for Setting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Setting::I => write!(f, "i"),
            Setting::II => write!(f, "ii"),
            Setting::III => write!(f, "iii"),
            Setting::IV => write!(f, "iv"),
        }
    }
}

/// A fully specified sampling model: radial law plus covariance.
#[derive(Debug, Clone)]
pub struct PanelModel {
    pub law: RadialLaw,
    pub covariance: Covariance,
}

impl PanelModel {
    pub fn new(law: RadialLaw, covariance: Covariance) -> Result<Self> {
        law.validate()?;
        Ok(PanelModel { law, covariance })
    }

    /// Canonical setting with Σ = ar1(0.5) in dimension `p`.
    pub fn setting(setting: Setting, p: usize) -> Self {
        let covariance = make_covariance(&CovarianceSpec::Ar1 { rho: 0.5, p })
            .expect("ar1(0.5) is always valid");
        PanelModel {
            law: setting.law(),
            covariance,
        }
    }

    pub fn p(&self) -> usize {
        self.covariance.p()
    }
}

/// Draw an n×p panel
/// X_i = θ + v_i Γ W_i with W_i ~ N(0, I_p), fully determined by `seed`.
pub fn sample_panel(model: &PanelModel, n: usize, signal: &SignalSpec, seed: u64) -> Result<Sample> {
    let p = model.p();
    let theta = signal.theta(p)?;
    let mut rng = stream_rng(seed, streams::PANEL);
    let mut values = Array2::zeros((n, p));
    let mut z = vec![0.0; p];
    for i in 0..n {
        let v = model.law.draw(&mut rng);
        for zj in z.iter_mut() {
            *zj = rng.sample(StandardNormal);
        }
        match model.covariance.spec() {
            CovarianceSpec::Ar1 { rho, .. } => {
                // AR(1) recursion reproduces Σ = ρ^{|i−j|} exactly in O(p)
                let c = (1.0 - rho * rho).sqrt();
                let mut prev = z[0];
                values[[i, 0]] = theta[0] + v * prev;
                for j in 1..p {
                    prev = rho * prev + c * z[j];
                    values[[i, j]] = theta[j] + v * prev;
                }
            }
            CovarianceSpec::Identity { .. } => {
                for j in 0..p {
                    values[[i, j]] = theta[j] + v * z[j];
                }
            }
            CovarianceSpec::Custom { .. } => {
                let l = model.covariance.factor();
                for j in 0..p {
                    let mut acc = 0.0;
                    for k in 0..=j {
                        acc += l[[j, k]] * z[k];
                    }
                    values[[i, j]] = theta[j] + v * acc;
                }
            }
        }
    }
    Sample::new(values)
}

/// How to evaluate a radial moment.
#[derive(Debug, Clone, Copy)]
pub enum MomentMode {
    ClosedForm,
    Mc { draws: usize, seed: u64 },
}

/// E(v^k) for the mixing variable of a radial law.
///
/// Closed forms: normal v ≡ 1; t(df) via gamma functions (exists for
/// k < df); two-point arithmetic for the mixture. The Monte Carlo mode
/// draws v directly.
pub fn radial_moment(law: &RadialLaw, k: f64, mode: MomentMode) -> Result<f64> {
    law.validate()?;
    if !k.is_finite() {
        return Err(invalid("moment exponent must be finite"));
    }
    check_moment_exists(law, k)?;
    match mode {
        MomentMode::ClosedForm => Ok(closed_form_moment(law, k)),
        MomentMode::Mc { draws, seed } => {
            if draws == 0 {
                return Err(invalid("Monte Carlo moment needs at least one draw"));
            }
            let mut rng = stream_rng(seed, streams::RADIAL_MC);
            let mut acc = 0.0;
            for _ in 0..draws {
                acc += law.draw(&mut rng).powf(k);
            }
            Ok(acc / draws as f64)
        }
    }
}

pub(crate) fn check_moment_exists(law: &RadialLaw, k: f64) -> Result<()> {
    if let RadialLaw::T { df } = law {
        if k >= *df {
            return Err(invalid(format!(
                "E(v^{k}) does not exist for a t({df}) radial law (requires k < df)"
            )));
        }
    }
    Ok(())
}

pub(crate) fn closed_form_moment(law: &RadialLaw, k: f64) -> f64 {
    match *law {
        RadialLaw::Normal => 1.0,
        RadialLaw::T { df } => {
            // v^k = (df/chi2)^{k/2}; E(chi2^{-k/2}) = 2^{-k/2} Γ(df/2 − k/2)/Γ(df/2)
            use statrs::function::gamma::ln_gamma;
            ((df / 2.0).ln() * (k / 2.0) + ln_gamma((df - k) / 2.0) - ln_gamma(df / 2.0)).exp()
        }
        RadialLaw::Mixture { gamma, sigma } => (1.0 - gamma) + gamma * sigma.powf(k),
    }
}

/// Stream ids keeping independent uses of the generator separated.
pub(crate) mod streams {
    pub const PANEL: u64 = 0;
    pub const RADIAL_MC: u64 = 1;
    pub const SUBSAMPLE: u64 = 2;
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of replication `replication` from a master seed.
/// The derivation is a pure function of its arguments, so any scheduling
/// of replications over workers reproduces the same panels.
pub fn replication_seed(master: u64, replication: u64) -> u64 {
    let mut state = master ^ 0xA24B_AED4_963E_E407u64.wrapping_mul(replication.wrapping_add(1));
    let a = splitmix64(&mut state);
    splitmix64(&mut state) ^ a.rotate_left(17)
}

/// Counter-based generator for (seed, stream).
pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut state = seed ^ 0x9FB2_1C65_1E98_DF25u64.wrapping_mul(stream.wrapping_add(1));
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha12Rng::from_seed(bytes)
}
