//! Nearest-neighbour chain Hamiltonians `H = sum_i H_i` with `||H_i|| <= 1`,
//! and their second-order Trotter gate schedules.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tensor::{hermitian_expm, spectral_norm, Tensor, C64};

/// Hermiticity and norm tolerance for stored terms.
pub const TERM_TOL: f64 = 1e-12;

pub type Params = BTreeMap<String, f64>;

/// Pauli matrix by letter (`I`, `X`, `Y`, `Z`).
pub fn pauli(letter: char) -> Result<Tensor> {
    let (o, l, i) = (C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0));
    let data = match letter.to_ascii_uppercase() {
        'I' => vec![l, o, o, l],
        'X' => vec![o, l, l, o],
        'Y' => vec![o, -i, i, o],
        'Z' => vec![l, o, o, -l],
        other => return Err(Error::InvalidArgument(format!("unknown Pauli letter `{other}`"))),
    };
    Tensor::new(vec![2, 2], data)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelFamily {
    /// `-J Z Z - g X`; requires `g`, optional `j` (default 1).
    Tfim,
    /// `J (X X + Y Y + delta Z Z) + h Z`; optional `j` (1), `delta` (1), `h` (0).
    Heisenberg,
    /// Independent Gaussian Hermitian bond terms; requires a seed, optional `d` (2).
    RandomNn,
}

impl FromStr for ModelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tfim" => Ok(ModelFamily::Tfim),
            "heisenberg" => Ok(ModelFamily::Heisenberg),
            "random-nn" => Ok(ModelFamily::RandomNn),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFamily::Tfim => "tfim",
            ModelFamily::Heisenberg => "heisenberg",
            ModelFamily::RandomNn => "random-nn",
        })
    }
}

/// A chain of `n` sites of dimension `d` with one Hermitian `d^2 x d^2` term
/// per bond. `terms[k]` couples sites `k` and `k + 1` (0-based), i.e. bond
/// `k + 1` in the cut numbering used throughout the crate.
#[derive(Clone, Debug)]
pub struct ChainModel {
    n: usize,
    d: usize,
    terms: Vec<Tensor>,
}

impl ChainModel {
    /// Wraps user-supplied terms, normalizing each to spectral norm at most 1.
    pub fn from_terms(d: usize, terms: Vec<Tensor>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidArgument("a chain needs at least 2 sites".into()));
        }
        if d < 2 {
            return Err(Error::InvalidArgument(
                "local dimension must be at least 2".into(),
            ));
        }
        let terms = terms
            .into_iter()
            .map(|t| {
                if t.shape() != [d * d, d * d] {
                    return Err(Error::DimensionMismatch(format!(
                        "bond term of shape {:?}, expected [{1}, {1}]",
                        t.shape(),
                        d * d
                    )));
                }
                if !t.is_hermitian(TERM_TOL) {
                    return Err(Error::NotHermitian {
                        deviation: t.hermitian_deviation()?,
                    });
                }
                normalize_term(t)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ChainModel {
            n: terms.len() + 1,
            d,
            terms,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn terms(&self) -> &[Tensor] {
        &self.terms
    }

    /// True when every pair of bond terms commutes (checked on overlapping bonds).
    pub fn is_commuting(&self) -> bool {
        let d = self.d;
        let id = Tensor::identity(d);
        self.terms.windows(2).all(|w| {
            let a = w[0].kron(&id).unwrap();
            let b = id.kron(&w[1]).unwrap();
            let ab = a.matmul(&b).unwrap();
            let ba = b.matmul(&a).unwrap();
            ab.sub(&ba).unwrap().norm() <= 1e-12 * (1.0 + ab.norm())
        })
    }
}

fn normalize_term(t: Tensor) -> Result<Tensor> {
    // Symmetrize so stored terms are Hermitian to rounding.
    let t = t.add(&t.dagger()?)?.scale_real(0.5);
    let norm = spectral_norm(&t)?;
    Ok(if norm > 1.0 { t.scale_real(1.0 / norm) } else { t })
}

fn param(params: &Params, key: &str) -> Result<f64> {
    params
        .get(key)
        .copied()
        .ok_or_else(|| Error::MissingParam(key.to_string()))
}

fn param_or(params: &Params, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Weight a single-site field at the left and right site of bond term `k`
/// receives: half on interior sites, full at the chain ends.
fn field_weights(k: usize, n: usize) -> (f64, f64) {
    let left = if k == 0 { 1.0 } else { 0.5 };
    let right = if k + 2 == n { 1.0 } else { 0.5 };
    (left, right)
}

pub fn build_model(family: ModelFamily, n: usize, params: &Params, seed: Option<u64>) -> Result<ChainModel> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("chain needs n >= 2, got {n}")));
    }
    let id = pauli('I')?;
    let (x, y, z) = (pauli('X')?, pauli('Y')?, pauli('Z')?);
    let kron = |a: &Tensor, b: &Tensor| a.kron(b).expect("2x2 factors");

    match family {
        ModelFamily::Tfim => {
            let g = param(params, "g")?;
            let j = param_or(params, "j", 1.0);
            let zz = kron(&z, &z).scale_real(-j);
            let xl = kron(&x, &id).scale_real(-g);
            let xr = kron(&id, &x).scale_real(-g);
            let terms = (0..n - 1)
                .map(|k| {
                    let (wl, wr) = field_weights(k, n);
                    zz.add(&xl.scale_real(wl))?.add(&xr.scale_real(wr))
                })
                .collect::<Result<Vec<_>>>()?;
            ChainModel::from_terms(2, terms)
        }
        ModelFamily::Heisenberg => {
            let j = param_or(params, "j", 1.0);
            let delta = param_or(params, "delta", 1.0);
            let h = param_or(params, "h", 0.0);
            let bond = kron(&x, &x)
                .add(&kron(&y, &y))?
                .add(&kron(&z, &z).scale_real(delta))?
                .scale_real(j);
            let zl = kron(&z, &id).scale_real(h);
            let zr = kron(&id, &z).scale_real(h);
            let terms = (0..n - 1)
                .map(|k| {
                    let (wl, wr) = field_weights(k, n);
                    bond.add(&zl.scale_real(wl))?.add(&zr.scale_real(wr))
                })
                .collect::<Result<Vec<_>>>()?;
            ChainModel::from_terms(2, terms)
        }
        ModelFamily::RandomNn => {
            let seed = seed.ok_or_else(|| Error::MissingParam("seed".into()))?;
            let d = param_or(params, "d", 2.0);
            if d < 2.0 || d.fract() != 0.0 {
                return Err(Error::InvalidArgument(format!("bad local dimension {d}")));
            }
            let d = d as usize;
            let dim = d * d;
            // ChaCha8 stream; each term draws dim*dim (re, im) standard normals row-major.
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let terms = (0..n - 1)
                .map(|_| {
                    let g = Tensor::from_fn(&[dim, dim], |_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        C64::new(re, im)
                    });
                    g.add(&g.dagger()?)
                })
                .collect::<Result<Vec<_>>>()?;
            ChainModel::from_terms(d, terms)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BondParity {
    /// Bonds 1, 3, 5, ...
    Odd,
    /// Bonds 2, 4, 6, ...
    Even,
}

impl BondParity {
    pub fn bonds(self, n: usize) -> impl Iterator<Item = usize> {
        let first = match self {
            BondParity::Odd => 1,
            BondParity::Even => 2,
        };
        (first..n).step_by(2)
    }
}

#[derive(Clone, Debug)]
pub struct Gate {
    /// Bond index in `1..n`; acts on sites `bond - 1` and `bond` (0-based).
    pub bond: usize,
    /// `exp(-dt * H_bond)` as a `d^2 x d^2` matrix.
    pub matrix: Tensor,
}

#[derive(Clone, Debug)]
pub struct GateLayer {
    /// Effective imaginary-time step of every gate in the layer.
    pub dt: f64,
    pub parity: BondParity,
    pub gates: Vec<Gate>,
}

/// All gates `exp(-dt * H_b)` for bonds of one parity.
pub fn gate_layer(model: &ChainModel, parity: BondParity, dt: f64) -> Result<GateLayer> {
    let gates = parity
        .bonds(model.n())
        .map(|bond| {
            Ok(Gate {
                bond,
                matrix: hermitian_expm(&model.terms()[bond - 1], -dt)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GateLayer { dt, parity, gates })
}

/// One symmetric second-order step approximating `exp(-dt H)`:
/// odd bonds at `dt/2`, even bonds at `dt`, odd bonds at `dt/2`.
pub fn trotter_layers(model: &ChainModel, dt: f64) -> Result<Vec<GateLayer>> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let half = gate_layer(model, BondParity::Odd, dt / 2.0)?;
    let full = gate_layer(model, BondParity::Even, dt)?;
    Ok(vec![half.clone(), full, half])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{dense_hamiltonian, embed_bond_operator};
    use crate::tensor::eigh;

    fn tfim(n: usize, g: f64) -> ChainModel {
        let mut p = Params::new();
        p.insert("g".into(), g);
        build_model(ModelFamily::Tfim, n, &p, None).unwrap()
    }

    #[test]
    fn classical_ising_term() {
        let m = tfim(2, 0.0);
        let z = pauli('Z').unwrap();
        let want = z.kron(&z).unwrap().scale_real(-1.0);
        assert!(m.terms()[0].max_abs_diff(&want).unwrap() < 1e-15);
        assert!((spectral_norm(&m.terms()[0]).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interior_terms_normalized_to_one() {
        let m = tfim(4, 1.05);
        // Oracle: eigenvalues of the unnormalized interior term.
        let (x, z, id) = (pauli('X').unwrap(), pauli('Z').unwrap(), pauli('I').unwrap());
        let raw = z
            .kron(&z)
            .unwrap()
            .scale_real(-1.0)
            .sub(&x.kron(&id).unwrap().scale_real(0.525))
            .unwrap()
            .sub(&id.kron(&x).unwrap().scale_real(0.525))
            .unwrap();
        let (vals, _) = eigh(&raw).unwrap();
        let raw_norm = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(raw_norm > 1.0);
        assert!(
            m.terms()[1]
                .max_abs_diff(&raw.scale_real(1.0 / raw_norm))
                .unwrap()
                < 1e-13
        );
        let (vals, _) = eigh(&m.terms()[1]).unwrap();
        let norm = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!((norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weak_terms_not_scaled_up() {
        let mut p = Params::new();
        p.insert("g".into(), 0.0);
        p.insert("j".into(), 0.25);
        let m = build_model(ModelFamily::Tfim, 3, &p, None).unwrap();
        assert!((spectral_norm(&m.terms()[0]).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn random_nn_is_deterministic() {
        let p = Params::new();
        let a = build_model(ModelFamily::RandomNn, 5, &p, Some(42)).unwrap();
        let b = build_model(ModelFamily::RandomNn, 5, &p, Some(42)).unwrap();
        let c = build_model(ModelFamily::RandomNn, 5, &p, Some(43)).unwrap();
        for (ta, tb) in a.terms().iter().zip(b.terms()) {
            assert_eq!(ta, tb);
        }
        assert_ne!(a.terms()[0], c.terms()[0]);
    }

    #[test]
    fn all_families_normalized_and_hermitian() {
        let mut p = Params::new();
        p.insert("g".into(), 2.5);
        p.insert("h".into(), 0.7);
        p.insert("d".into(), 3.0);
        for fam in [ModelFamily::Tfim, ModelFamily::Heisenberg, ModelFamily::RandomNn] {
            let m = build_model(fam, 6, &p, Some(1)).unwrap();
            assert_eq!(m.terms().len(), 5);
            for t in m.terms() {
                assert!(spectral_norm(t).unwrap() <= 1.0 + TERM_TOL);
                assert!(t.hermitian_deviation().unwrap() <= TERM_TOL);
            }
        }
    }

    #[test]
    fn build_errors() {
        let p = Params::new();
        assert!(matches!(
            "ising".parse::<ModelFamily>(),
            Err(Error::UnknownFamily(_))
        ));
        assert!(matches!(
            build_model(ModelFamily::Tfim, 4, &p, None),
            Err(Error::MissingParam(k)) if k == "g"
        ));
        assert!(build_model(ModelFamily::Heisenberg, 1, &p, None).is_err());
        assert!(matches!(
            build_model(ModelFamily::RandomNn, 3, &p, None),
            Err(Error::MissingParam(k)) if k == "seed"
        ));
    }

    #[test]
    fn field_splitting_reproduces_model() {
        // Bond terms before normalization must sum to -sum ZZ - g sum X.
        let n = 4;
        let g = 0.3;
        let m = tfim(n, g);
        // Stored terms are normalized, so rebuild the expectation term by term.
        let h = dense_hamiltonian(&m, 1 << 12).unwrap().matrix().clone();
        let mut want = Tensor::zeros(&[16, 16]);
        let (x, z) = (pauli('X').unwrap(), pauli('Z').unwrap());
        let zz = z.kron(&z).unwrap();
        let raw_terms: Vec<Tensor> = (0..n - 1)
            .map(|k| {
                let (wl, wr) = field_weights(k, n);
                let id = pauli('I').unwrap();
                zz.scale_real(-1.0)
                    .sub(&x.kron(&id).unwrap().scale_real(g * wl))
                    .unwrap()
                    .sub(&id.kron(&x).unwrap().scale_real(g * wr))
                    .unwrap()
            })
            .collect();
        for (k, raw) in raw_terms.iter().enumerate() {
            let s = spectral_norm(raw).unwrap().max(1.0);
            want = want
                .add(&embed_bond_operator(&raw.scale_real(1.0 / s), k, n, 2).unwrap())
                .unwrap();
        }
        assert!(h.max_abs_diff(&want).unwrap() < 1e-13);
        // Without normalization the raw terms sum to the textbook Hamiltonian.
        let mut raw_sum = Tensor::zeros(&[16, 16]);
        for (k, raw) in raw_terms.iter().enumerate() {
            raw_sum = raw_sum.add(&embed_bond_operator(raw, k, n, 2).unwrap()).unwrap();
        }
        let mut textbook = Tensor::zeros(&[16, 16]);
        for k in 0..n - 1 {
            textbook = textbook.sub(&embed_bond_operator(&zz, k, n, 2).unwrap()).unwrap();
        }
        for site in 0..n {
            let mut op = Tensor::identity(1);
            for s in 0..n {
                let f = if s == site { x.clone() } else { Tensor::identity(2) };
                op = op.kron(&f).unwrap();
            }
            textbook = textbook.sub(&op.scale_real(g)).unwrap();
        }
        assert!(raw_sum.max_abs_diff(&textbook).unwrap() < 1e-14);
    }

    fn dense_step(model: &ChainModel, dt: f64) -> Tensor {
        let n = model.n();
        let dim = 1usize << n;
        let mut u = Tensor::identity(dim);
        for layer in trotter_layers(model, dt).unwrap() {
            for gate in &layer.gates {
                let g = embed_bond_operator(&gate.matrix, gate.bond - 1, n, 2).unwrap();
                u = g.matmul(&u).unwrap();
            }
        }
        u
    }

    #[test]
    fn single_bond_step_is_exact() {
        let m = tfim(2, 0.8);
        let dt = 0.37;
        let step = dense_step(&m, dt);
        let exact = hermitian_expm(&m.terms()[0], -dt).unwrap();
        assert!(step.max_abs_diff(&exact).unwrap() < 1e-14);
    }

    #[test]
    fn zero_terms_give_identity_gates() {
        let zero = Tensor::zeros(&[4, 4]);
        let m = ChainModel::from_terms(2, vec![zero.clone(), zero.clone(), zero]).unwrap();
        for layer in trotter_layers(&m, 0.1).unwrap() {
            for g in layer.gates {
                assert!(g.matrix.max_abs_diff(&Tensor::identity(4)).unwrap() < 1e-15);
            }
        }
        assert!(trotter_layers(&m, 0.0).is_err());
    }

    #[test]
    fn schedule_shape() {
        let m = tfim(5, 1.0);
        let layers = trotter_layers(&m, 0.2).unwrap();
        let bonds: Vec<Vec<usize>> = layers
            .iter()
            .map(|l| l.gates.iter().map(|g| g.bond).collect())
            .collect();
        assert_eq!(bonds, vec![vec![1, 3], vec![2, 4], vec![1, 3]]);
        assert_eq!(
            layers.iter().map(|l| l.dt).collect::<Vec<_>>(),
            vec![0.1, 0.2, 0.1]
        );
    }

    #[test]
    fn local_error_is_third_order() {
        let m = tfim(4, 1.05);
        let h = dense_hamiltonian(&m, 1 << 12).unwrap().matrix().clone();
        let err = |dt: f64| {
            let exact = hermitian_expm(&h, -dt).unwrap();
            dense_step(&m, dt).sub(&exact).unwrap().norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 8.0).abs() < 0.8, "ratio {ratio}");
    }

    #[test]
    fn global_error_is_second_order() {
        let m = tfim(6, 1.05);
        let h = dense_hamiltonian(&m, 1 << 12).unwrap().matrix().clone();
        let total = 0.8;
        let exact = hermitian_expm(&h, -total).unwrap();
        let dts = [0.2, 0.1, 0.05, 0.025];
        let errs: Vec<f64> = dts
            .iter()
            .map(|&dt| {
                let steps = (total / dt).round() as usize;
                let step = dense_step(&m, dt);
                let mut u = Tensor::identity(64);
                for _ in 0..steps {
                    u = step.matmul(&u).unwrap();
                }
                u.sub(&exact).unwrap().norm() / exact.norm()
            })
            .collect();
        let pts: Vec<(f64, f64)> = dts.iter().zip(&errs).map(|(d, e)| (d.ln(), e.ln())).collect();
        let fit = crate::harness::fit_loglinear(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() <= 0.3, "slope {}", fit.slope);
    }

    #[test]
    fn commuting_detection() {
        assert!(tfim(4, 0.0).is_commuting());
        assert!(!tfim(4, 1.0).is_commuting());
    }
}
