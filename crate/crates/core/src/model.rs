//! Ring topology and assembly of the time-dependent Hamiltonian
//!
//! ```text
//! H(t) = t·K + C
//! K    = (r/2) Σ_k σz_k
//! C    = g Σ_k σx_k + J1 Σ_{first} σz_i σz_j + J2 Σ_{second} σz_i σz_j
//! ```
//!
//! in units where ħ = 1 and the tunneling energy `g` sets the energy scale.

use crate::error::{Error, Result};
use crate::operators::{embed, pauli, spin_of, two_site_zz, ComplexMatrix, Pauli, MAX_SITES};

/// Largest register the entrywise oracle will build.
pub const ORACLE_MAX_SITES: usize = 6;

/// First- and second-neighbor pairs on a periodic ring. Pairs are stored as
/// `(lo, hi)` with `lo < hi`, each unordered pair at most once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingTopology {
    n: usize,
    first_pairs: Vec<(usize, usize)>,
    second_pairs: Vec<(usize, usize)>,
}

impl RingTopology {
    /// A lone site with no couplings.
    pub fn single_site() -> Self {
        Self {
            n: 1,
            first_pairs: Vec::new(),
            second_pairs: Vec::new(),
        }
    }

    /// [`ring_topology`] for `n >= 2`, [`RingTopology::single_site`] for `n = 1`.
    pub fn for_sites(n: usize) -> Result<Self> {
        if n == 1 {
            Ok(Self::single_site())
        } else {
            ring_topology(n)
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn first_pairs(&self) -> &[(usize, usize)] {
        &self.first_pairs
    }

    pub fn second_pairs(&self) -> &[(usize, usize)] {
        &self.second_pairs
    }
}

pub fn ring_topology(n: usize) -> Result<RingTopology> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "a ring needs at least 2 sites, got {n}"
        )));
    }
    if n > MAX_SITES {
        return Err(Error::Capacity {
            what: "ring topology",
            sites: n,
            max: MAX_SITES,
        });
    }
    let pair = |a: usize, b: usize| (a.min(b), a.max(b));

    let mut first_pairs = Vec::new();
    for k in 0..n {
        let p = pair(k, (k + 1) % n);
        if !first_pairs.contains(&p) {
            first_pairs.push(p);
        }
    }
    let mut second_pairs = Vec::new();
    for k in 0..n {
        let p = pair(k, (k + 2) % n);
        if p.0 != p.1 && !first_pairs.contains(&p) && !second_pairs.contains(&p) {
            second_pairs.push(p);
        }
    }
    Ok(RingTopology {
        n,
        first_pairs,
        second_pairs,
    })
}

/// Dimensionless model parameters: tunneling energy `g`, first- and
/// second-neighbor couplings `j1`, `j2` (negative is ferromagnetic) and sweep
/// rate `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CouplingParams {
    pub g: f64,
    pub j1: f64,
    pub j2: f64,
    pub r: f64,
}

impl Default for CouplingParams {
    fn default() -> Self {
        Self {
            g: 1.0,
            j1: 0.0,
            j2: 0.0,
            r: 1.0,
        }
    }
}

impl CouplingParams {
    pub fn new(j1: f64, j2: f64, r: f64) -> Self {
        Self {
            j1,
            j2,
            r,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g.is_finite() && self.g >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "g must be >= 0, got {}",
                self.g
            )));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "r must be > 0, got {}",
                self.r
            )));
        }
        if !self.j1.is_finite() || !self.j2.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "couplings must be finite, got j1 = {}, j2 = {}",
                self.j1, self.j2
            )));
        }
        Ok(())
    }
}

/// `H(t) = t·K + C` with the sweep part `K` (diagonal) and static part `C`
/// precomputed. Immutable once built.
#[derive(Clone, Debug)]
pub struct LzHamiltonian {
    n: usize,
    sweep: ComplexMatrix,
    static_part: ComplexMatrix,
    params: CouplingParams,
}

impl LzHamiltonian {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// `K`, the coefficient of `t`.
    pub fn sweep(&self) -> &ComplexMatrix {
        &self.sweep
    }

    /// `C`, the time-independent part.
    pub fn static_part(&self) -> &ComplexMatrix {
        &self.static_part
    }

    pub fn params(&self) -> &CouplingParams {
        &self.params
    }
}

pub fn build_hamiltonian(params: &CouplingParams, topo: &RingTopology) -> Result<LzHamiltonian> {
    params.validate()?;
    let n = topo.n;
    let dim = 1usize << n;
    let sigma_x = pauli(Pauli::X);
    let sigma_z = pauli(Pauli::Z);

    // Integer-valued sums first, then one scaling each.
    let mut field = ComplexMatrix::zeros(dim);
    let mut flips = ComplexMatrix::zeros(dim);
    for k in 0..n {
        field.add_scaled(1.0, &embed(&sigma_z, k, n)?);
        flips.add_scaled(1.0, &embed(&sigma_x, k, n)?);
    }
    let mut first = ComplexMatrix::zeros(dim);
    for &(i, j) in &topo.first_pairs {
        first.add_scaled(1.0, &two_site_zz(i, j, n)?);
    }
    let mut second = ComplexMatrix::zeros(dim);
    for &(i, j) in &topo.second_pairs {
        second.add_scaled(1.0, &two_site_zz(i, j, n)?);
    }

    let sweep = field.scale(params.r / 2.0);
    let mut static_part = flips.scale(params.g);
    static_part.add_scaled(params.j1, &first);
    static_part.add_scaled(params.j2, &second);

    Ok(LzHamiltonian {
        n,
        sweep,
        static_part,
        params: *params,
    })
}

pub fn hamiltonian_at(h: &LzHamiltonian, t: f64) -> ComplexMatrix {
    let mut out = h.static_part.clone();
    out.add_scaled(t, &h.sweep);
    out
}

/// Entrywise construction of `H(t)` straight from basis bitstrings, with no
/// Kronecker products. Each entry is evaluated with the same floating-point
/// association as [`build_hamiltonian`] + [`hamiltonian_at`], so the two
/// agree bit for bit.
pub fn brute_force_hamiltonian(
    params: &CouplingParams,
    topo: &RingTopology,
    t: f64,
) -> Result<ComplexMatrix> {
    params.validate()?;
    let n = topo.n;
    if n > ORACLE_MAX_SITES {
        return Err(Error::Capacity {
            what: "brute-force oracle",
            sites: n,
            max: ORACLE_MAX_SITES,
        });
    }
    let dim = 1usize << n;
    let mut h = ComplexMatrix::zeros(dim);
    let pair_sum = |b: usize, pairs: &[(usize, usize)]| -> f64 {
        pairs
            .iter()
            .map(|&(i, j)| spin_of(b, i, n) * spin_of(b, j, n))
            .sum()
    };
    for b in 0..dim {
        let magnetization: f64 = (0..n).map(|k| spin_of(b, k, n)).sum();
        let field = (params.r / 2.0) * magnetization;
        let coupling = params.j1 * pair_sum(b, &topo.first_pairs)
            + params.j2 * pair_sum(b, &topo.second_pairs);
        h[(b, b)].re = coupling + field * t;
        for other in 0..dim {
            if (b ^ other).count_ones() == 1 {
                h[(b, other)].re = params.g;
            }
        }
    }
    Ok(h)
}
