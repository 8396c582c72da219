//! Datasets and synthetic data generators.

use crate::distributions::{ProbVector, RngStream, Sample};
use crate::error::{Error, Result};

/// A list of samples with a uniform variant and dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    samples: Vec<Sample>,
    pub name: String,
    pub source: String,
}

impl Dataset {
    pub fn new(samples: Vec<Sample>, name: &str, source: &str) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput("dataset"));
        }
        let variant = samples[0].variant_name();
        let dim = samples[0].dim();
        for (i, s) in samples.iter().enumerate() {
            if s.variant_name() != variant {
                return Err(Error::VariantMismatch {
                    expected: variant,
                    got: s.variant_name(),
                });
            }
            if s.dim() != dim {
                return Err(Error::Data(format!(
                    "sample {i} has dimension {} but the dataset uses {dim}",
                    s.dim()
                )));
            }
        }
        Ok(Self {
            samples,
            name: name.to_string(),
            source: source.to_string(),
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn variant(&self) -> &'static str {
        self.samples[0].variant_name()
    }

    pub fn dim(&self) -> usize {
        self.samples[0].dim()
    }

    /// Borrow a contiguous sub-range as a new dataset (for held-out splits).
    pub fn slice(&self, range: std::ops::Range<usize>, name: &str) -> Result<Self> {
        Dataset::new(self.samples[range].to_vec(), name, &self.source)
    }
}

/// `n` i.i.d. categorical draws from `p`.
pub fn gen_discrete(p: &ProbVector, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".to_string()));
    }
    let mut rng = RngStream::new(seed, STREAM_DATA);
    let samples = (0..n).map(|_| Sample::Discrete(p.sample(&mut rng))).collect();
    Dataset::new(samples, "discrete", &format!("gen_discrete(seed={seed})"))
}

/// One isotropic Gaussian mixture component.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub mean: Vec<f64>,
    pub std: f64,
}

/// `n` draws from a Gaussian mixture: component by weight, then isotropic
/// noise around its mean.
pub fn gen_mixture(components: &[MixtureComponent], n: usize, seed: u64) -> Result<Dataset> {
    if components.is_empty() {
        return Err(Error::EmptyInput("mixture components"));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".to_string()));
    }
    let dim = components[0].mean.len();
    for (i, comp) in components.iter().enumerate() {
        if comp.mean.len() != dim {
            return Err(Error::Data(format!(
                "component {i} has dimension {} but expected {dim}",
                comp.mean.len()
            )));
        }
        if !(comp.std > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "component {i} std must be positive, got {}",
                comp.std
            )));
        }
    }
    let weights = ProbVector::from_weights(
        &components.iter().map(|c| c.weight).collect::<Vec<_>>(),
    )?;
    let mut rng = RngStream::new(seed, STREAM_DATA);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let comp = &components[weights.sample(&mut rng)];
        let x: Vec<f64> = comp
            .mean
            .iter()
            .map(|&m| m + comp.std * rng.next_gaussian())
            .collect();
        samples.push(Sample::Real(x));
    }
    Dataset::new(samples, "mixture", &format!("gen_mixture(seed={seed})"))
}

/// Fixed stream ids so independent concerns never share draws.
pub const STREAM_DATA: u64 = 1;
pub const STREAM_PROTO: u64 = 2;

/// Seeded non-uniform target over `k` states: weights `0.5 + u_i` from a
/// fixed stream, normalized. Entries stay within a factor of 3 of each
/// other, so every state keeps enough mass for counting estimates.
pub fn seeded_target(k: usize) -> ProbVector {
    assert!(k >= 2, "seeded_target needs k >= 2");
    let mut rng = RngStream::new(0x6dae, 10);
    let weights: Vec<f64> = (0..k).map(|_| 0.5 + rng.next_f64()).collect();
    ProbVector::from_weights(&weights).expect("positive weights")
}

/// The canonical 10-state target used by the discrete experiments and
/// shipped as `fixtures/discrete_target_k10.csv`.
pub fn default_discrete_target() -> ProbVector {
    seeded_target(10)
}

/// The canonical 3-component mixture over R^10 used by the continuous
/// experiment: means from a fixed stream in `[-1, 1]^10`, component
/// spreads comparable to their separation so a local corruption can carry
/// the chain between modes.
pub fn default_mixture() -> Vec<MixtureComponent> {
    let mut rng = RngStream::new(0x6dae, 11);
    let weights = [0.4, 0.33, 0.27];
    let stds = [0.55, 0.65, 0.6];
    (0..3)
        .map(|i| MixtureComponent {
            weight: weights[i],
            mean: (0..10).map(|_| 2.0 * rng.next_f64() - 1.0).collect(),
            std: stds[i],
        })
        .collect()
}

/// Synthetic binary images: a mixture of `n_protos` fixed prototype
/// patterns with independent per-bit flip noise. Stands in for real image
/// data in tests and examples; the prototypes are structured (random
/// horizontal and vertical strokes) so the distribution has well-separated
/// modes.
pub fn gen_binary_prototypes(
    n: usize,
    side: usize,
    n_protos: usize,
    flip_prob: f64,
    seed: u64,
) -> Result<Dataset> {
    if n == 0 || side == 0 || n_protos == 0 {
        return Err(Error::InvalidParameter(
            "n, side, and n_protos must all be positive".to_string(),
        ));
    }
    if !(0.0..=1.0).contains(&flip_prob) {
        return Err(Error::InvalidParameter(format!(
            "flip_prob must lie in [0, 1], got {flip_prob}"
        )));
    }
    let d = side * side;
    // Prototypes come from a fixed stream so every caller agrees on them;
    // only the sampling stream depends on the seed.
    let mut proto_rng = RngStream::new(0x6dae, STREAM_PROTO);
    let mut protos = Vec::with_capacity(n_protos);
    for _ in 0..n_protos {
        let mut img = vec![0u8; d];
        let strokes = 3 + proto_rng.next_index(3);
        for _ in 0..strokes {
            let horizontal = proto_rng.next_bool(0.5);
            let pos = proto_rng.next_index(side);
            let start = proto_rng.next_index(side / 2);
            let len = side / 3 + proto_rng.next_index(side / 2);
            let width = 1 + proto_rng.next_index(2);
            for t in start..(start + len).min(side) {
                for w in 0..width {
                    let p = (pos + w).min(side - 1);
                    let (r, c) = if horizontal { (p, t) } else { (t, p) };
                    img[r * side + c] = 1;
                }
            }
        }
        protos.push(img);
    }

    let mut rng = RngStream::new(seed, STREAM_DATA);
    let mut samples = Vec::with_capacity(n);
    for _ in 0..n {
        let proto = &protos[rng.next_index(n_protos)];
        let bits = proto
            .iter()
            .map(|&b| if rng.next_bool(flip_prob) { 1 - b } else { b })
            .collect();
        samples.push(Sample::Binary(bits));
    }
    Dataset::new(
        samples,
        "binary_prototypes",
        &format!("gen_binary_prototypes(seed={seed})"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::total_variation;

    #[test]
    fn point_mass_generates_constants() {
        let p = ProbVector::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        let data = gen_discrete(&p, 5, 3).unwrap();
        for s in data.samples() {
            assert_eq!(*s, Sample::Discrete(3));
        }
    }

    #[test]
    fn generators_are_seed_deterministic() {
        let p = default_discrete_target();
        assert_eq!(gen_discrete(&p, 100, 9).unwrap(), gen_discrete(&p, 100, 9).unwrap());
        let comps = default_mixture();
        assert_eq!(
            gen_mixture(&comps, 50, 4).unwrap(),
            gen_mixture(&comps, 50, 4).unwrap()
        );
        assert_eq!(
            gen_binary_prototypes(20, 8, 4, 0.05, 2).unwrap(),
            gen_binary_prototypes(20, 8, 4, 0.05, 2).unwrap()
        );
    }

    #[test]
    fn empirical_target_frequency_is_close() {
        let p = default_discrete_target();
        let data = gen_discrete(&p, 5000, 1).unwrap();
        let mut counts = vec![0.0; 10];
        for s in data.samples() {
            counts[s.as_discrete().unwrap()] += 1.0;
        }
        let emp = ProbVector::from_weights(&counts).unwrap();
        let tv = total_variation(&emp, &p).unwrap();
        assert!(tv <= 0.03, "tv {tv}");
    }

    #[test]
    fn canonical_fixtures_match_their_recipes() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        let file = crate::io::read_prob_vector_csv(&dir.join("discrete_target_k10.csv")).unwrap();
        assert_eq!(file.as_slice(), default_discrete_target().as_slice());

        let idx = crate::io::load_idx(&dir.join("tiny_images.idx")).unwrap();
        assert_eq!(idx.len(), 2);
        assert_eq!(idx.samples()[0], Sample::Binary(vec![0, 1, 0, 1]));
        assert_eq!(idx.samples()[1], Sample::Binary(vec![1, 0, 0, 1]));
    }

    #[test]
    fn default_target_is_non_uniform_and_positive() {
        let p = default_discrete_target();
        assert_eq!(p.len(), 10);
        let min = p.as_slice().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = p.as_slice().iter().cloned().fold(0.0, f64::max);
        assert!(min > 0.02);
        assert!(max - min > 0.02, "suspiciously uniform: {:?}", p.as_slice());
    }

    #[test]
    fn degenerate_mixture_concentrates_at_mean() {
        let comps = vec![MixtureComponent {
            weight: 1.0,
            mean: vec![1.0, -2.0],
            std: 1e-9,
        }];
        let data = gen_mixture(&comps, 10, 0).unwrap();
        for s in data.samples() {
            let xs = s.as_real().unwrap();
            assert!((xs[0] - 1.0).abs() < 1e-6);
            assert!((xs[1] + 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn symmetric_mixture_centers_at_origin() {
        let comps = vec![
            MixtureComponent { weight: 0.5, mean: vec![1.0; 4], std: 0.3 },
            MixtureComponent { weight: 0.5, mean: vec![-1.0; 4], std: 0.3 },
        ];
        let data = gen_mixture(&comps, 10_000, 8).unwrap();
        let mut mean = vec![0.0; 4];
        for s in data.samples() {
            for (m, &v) in mean.iter_mut().zip(s.as_real().unwrap()) {
                *m += v;
            }
        }
        for m in &mut mean {
            *m /= data.len() as f64;
            assert!(m.abs() < 0.05, "coordinate mean {m}");
        }
    }

    #[test]
    fn mixed_variants_are_rejected() {
        let err = Dataset::new(
            vec![Sample::Discrete(0), Sample::Binary(vec![1])],
            "bad",
            "test",
        );
        assert!(err.is_err());
    }

    #[test]
    fn prototype_images_have_structure() {
        let data = gen_binary_prototypes(200, 12, 6, 0.02, 5).unwrap();
        assert_eq!(data.dim(), 144);
        // Not all-zero and not all-one.
        let total_ones: usize = data
            .samples()
            .iter()
            .map(|s| s.as_binary().unwrap().iter().map(|&b| b as usize).sum::<usize>())
            .sum();
        let frac = total_ones as f64 / (200.0 * 144.0);
        assert!(frac > 0.05 && frac < 0.95, "ones fraction {frac}");
    }
}
