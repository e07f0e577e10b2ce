//! Reproducible Brownian increments with exact dyadic coarse/fine coupling.
//!
//! Every random quantity in the crate is drawn from a [`RandomStream`] that is
//! a pure function of a [`StreamKey`]. Streams are ChaCha8 keystreams whose
//! 256-bit key is the packed `(seed, sample_index, substream)` triple, so a
//! sample's noise never depends on which worker simulates it or in which
//! order.
//!
//! [`BrownianLattice`] stores its increments as integer multiples of a
//! power-of-two quantum. Coarse increments are integer block sums, and bridge
//! refinement splits an increment into two integers with the same sum, so
//! both aggregation and refinement are exact to the last bit.

use std::io::{Read, Write};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::real::Real;

/// Identifier of the uniform generator and Gaussian transform, echoed in run
/// metadata so outputs from different builds can be compared.
pub const GAUSSIAN_TRANSFORM: &str = "chacha8-keyed/ziggurat(rand_distr-0.5 StandardNormal)";

/// Fractional bits kept below the per-step standard deviation.
const QUANTUM_BITS: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct StreamKey {
    pub seed: u64,
    pub sample_index: u64,
    pub substream: u32,
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey {
            seed,
            sample_index: 0,
            substream: 0,
        }
    }

    pub fn with_sample(self, sample_index: u64) -> Self {
        StreamKey {
            sample_index,
            ..self
        }
    }

    pub fn with_substream(self, substream: u32) -> Self {
        StreamKey { substream, ..self }
    }

    fn chacha_seed(&self) -> [u8; 32] {
        let mut bytes = [0u8; 32];
        bytes[..8].copy_from_slice(&self.seed.to_le_bytes());
        bytes[8..16].copy_from_slice(&self.sample_index.to_le_bytes());
        bytes[16..20].copy_from_slice(&self.substream.to_le_bytes());
        // domain tag, keeps the key space disjoint from plain `seed_from_u64`
        bytes[24..32].copy_from_slice(b"sdelab\x00\x01");
        bytes
    }
}

/// Counter-based stream of uniform and Gaussian variates.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    #[inline]
    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

/// The stream addressed by `key`. Pure: the same key always yields the same
/// sequence.
pub fn derive_stream(key: StreamKey) -> RandomStream {
    RandomStream {
        rng: ChaCha8Rng::from_seed(key.chacha_seed()),
    }
}

/// Equidistant grid `t_k = k T / n`, `k = 0..=n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid<T> {
    horizon: T,
    steps: usize,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(horizon: T, steps: usize) -> Result<Self> {
        if steps == 0 {
            return Err(Error::param("n", "a time grid needs at least one step"));
        }
        if !(horizon > T::zero()) || !horizon.is_finite() {
            return Err(Error::param("T", format!("horizon must be positive, got {horizon}")));
        }
        Ok(TimeGrid { horizon, steps })
    }

    pub fn horizon(&self) -> T {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> T {
        self.horizon / T::from_usize(self.steps).unwrap()
    }

    /// Node `t_k`, computed as `k T / n` so that `t_n == T` exactly.
    pub fn node(&self, k: usize) -> T {
        if k == self.steps {
            return self.horizon;
        }
        T::from_usize(k).unwrap() * self.horizon / T::from_usize(self.steps).unwrap()
    }
}

/// Brownian increments sampled on a dyadic grid of `finest` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrownianLattice {
    horizon_bits: u64,
    dims: usize,
    finest: usize,
    seed: u64,
    /// Value of one integer unit is `2^quantum_exp`.
    quantum_exp: i32,
    /// Row-major `dims × finest`.
    units: Vec<i128>,
}

fn require_power_of_two(name: &'static str, n: usize) -> Result<()> {
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::param(name, format!("{n} is not a power of two")));
    }
    Ok(())
}

fn quantum_exp_for(step_std: f64) -> i32 {
    step_std.log2().floor() as i32 - QUANTUM_BITS
}

#[inline]
fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Increments of one dimension-major lattice, sampled at a fixed resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct IncrementSequence<T> {
    grid: TimeGrid<T>,
    dims: usize,
    data: Vec<T>,
}

impl<T: Real> IncrementSequence<T> {
    pub fn grid(&self) -> TimeGrid<T> {
        self.grid
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    #[inline]
    pub fn get(&self, dim: usize, k: usize) -> T {
        self.data[dim * self.grid.steps() + k]
    }

    /// Copies the `k`-th increment vector into `out[..dims]`.
    #[inline]
    pub fn step_into(&self, k: usize, out: &mut [T]) {
        let n = self.grid.steps();
        for (j, o) in out.iter_mut().take(self.dims).enumerate() {
            *o = self.data[j * n + k];
        }
    }

    pub fn dimension(&self, dim: usize) -> &[T] {
        let n = self.grid.steps();
        &self.data[dim * n..(dim + 1) * n]
    }

    /// Brownian path values `W_{t_k}` for one dimension, `k = 0..=n`.
    pub fn cumulative(&self, dim: usize) -> Vec<T> {
        let mut w = Vec::with_capacity(self.steps() + 1);
        let mut acc = T::zero();
        w.push(acc);
        for &d in self.dimension(dim) {
            acc = acc + d;
            w.push(acc);
        }
        w
    }
}

/// Draws `n` iid `N(0, T/n)` increments per dimension without the dyadic
/// restriction. Single-resolution use only. Equals
/// `sample_lattice(key, T, m, n).increments_at(n)` whenever `n` is a power of
/// two.
pub fn sample_increments<T: Real>(
    key: StreamKey,
    horizon: T,
    dims: usize,
    steps: usize,
) -> Result<IncrementSequence<T>> {
    let grid = TimeGrid::new(horizon, steps)?;
    if dims == 0 {
        return Err(Error::param("m", "at least one noise dimension is required"));
    }
    let std = (horizon.to_f64_lossy() / steps as f64).sqrt();
    let q = quantum_exp_for(std);
    let scale = pow2(q);
    let mut data = Vec::with_capacity(dims * steps);
    for j in 0..dims {
        let mut stream = derive_stream(key.with_substream(key.substream + j as u32));
        for _ in 0..steps {
            // same rounding path as the lattice so both constructors agree
            let units = (stream.gaussian() * std / scale).round() as i128;
            data.push(T::lit(units as f64 * scale));
        }
    }
    Ok(IncrementSequence { grid, dims, data })
}

impl BrownianLattice {
    pub fn horizon(&self) -> f64 {
        f64::from_bits(self.horizon_bits)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn finest(&self) -> usize {
        self.finest
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Block sums of `finest / n` consecutive increments. `n == finest` is the
    /// identity.
    pub fn increments_at<T: Real>(&self, n: usize) -> Result<IncrementSequence<T>> {
        require_power_of_two("n", n)?;
        if n > self.finest || self.finest % n != 0 {
            return Err(Error::param(
                "n",
                format!("{n} does not divide the lattice resolution {}", self.finest),
            ));
        }
        let block = self.finest / n;
        let scale = pow2(self.quantum_exp);
        let mut data = Vec::with_capacity(self.dims * n);
        for j in 0..self.dims {
            let row = &self.units[j * self.finest..(j + 1) * self.finest];
            for chunk in row.chunks_exact(block) {
                let sum: i128 = chunk.iter().sum();
                data.push(T::lit(sum as f64 * scale));
            }
        }
        Ok(IncrementSequence {
            grid: TimeGrid::new(T::lit(self.horizon()), n)?,
            dims: self.dims,
            data,
        })
    }

    /// Integer representation at resolution `n`, for exact comparisons.
    pub fn units_at(&self, n: usize) -> Result<Vec<i128>> {
        require_power_of_two("n", n)?;
        if n > self.finest {
            return Err(Error::param("n", "finer than the lattice"));
        }
        let block = self.finest / n;
        Ok(self
            .units
            .chunks_exact(block)
            .map(|c| c.iter().sum())
            .collect())
    }

    /// Halves the step: each increment `δ` becomes `(δ/2 + ξ, δ/2 − ξ)` with
    /// `ξ ~ N(0, Δ/4)` drawn from `key` (dimension `j` uses substream
    /// `key.substream + j`). The key must not collide with the one that
    /// produced the lattice.
    pub fn bridge_refine(&self, key: StreamKey) -> Result<BrownianLattice> {
        let new_finest = self
            .finest
            .checked_mul(2)
            .ok_or_else(|| Error::param("finest_n", "refinement overflows usize"))?;
        let q = self.quantum_exp - 1;
        let new_scale = pow2(q);
        let xi_std = 0.5 * (self.horizon() / self.finest as f64).sqrt();
        let mut units = Vec::with_capacity(self.dims * new_finest);
        for j in 0..self.dims {
            let mut stream = derive_stream(key.with_substream(key.substream + j as u32));
            for &d in &self.units[j * self.finest..(j + 1) * self.finest] {
                let xi = (stream.gaussian() * xi_std / new_scale).round() as i128;
                // in units of the new quantum the parent is 2d
                let left = d + xi;
                units.push(left);
                units.push(2 * d - left);
            }
        }
        Ok(BrownianLattice {
            horizon_bits: self.horizon_bits,
            dims: self.dims,
            finest: new_finest,
            seed: self.seed,
            quantum_exp: q,
            units,
        })
    }

    /// Writes the header (T, m, finest_n, seed) and the row-major `f64`
    /// payload. Reloading yields a lattice whose values equal the payload.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(LATTICE_MAGIC)?;
        w.write_all(&self.horizon().to_le_bytes())?;
        w.write_all(&(self.dims as u64).to_le_bytes())?;
        w.write_all(&(self.finest as u64).to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        let scale = pow2(self.quantum_exp);
        for &u in &self.units {
            w.write_all(&(u as f64 * scale).to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<BrownianLattice> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != LATTICE_MAGIC {
            return Err(Error::Io("not a lattice dump".into()));
        }
        let mut word = [0u8; 8];
        let mut next = |r: &mut R| -> Result<[u8; 8]> {
            r.read_exact(&mut word)?;
            Ok(word)
        };
        let horizon = f64::from_le_bytes(next(&mut r)?);
        let dims = u64::from_le_bytes(next(&mut r)?) as usize;
        let finest = u64::from_le_bytes(next(&mut r)?) as usize;
        let seed = u64::from_le_bytes(next(&mut r)?);
        require_power_of_two("finest_n", finest)?;
        if dims == 0 || !(horizon > 0.0) {
            return Err(Error::Io("corrupt lattice header".into()));
        }
        let q = quantum_exp_for((horizon / finest as f64).sqrt());
        let scale = pow2(q);
        let mut units = Vec::with_capacity(dims * finest);
        for _ in 0..dims * finest {
            let v = f64::from_le_bytes(next(&mut r)?);
            units.push((v / scale).round() as i128);
        }
        Ok(BrownianLattice {
            horizon_bits: horizon.to_bits(),
            dims,
            finest,
            seed,
            quantum_exp: q,
            units,
        })
    }
}

const LATTICE_MAGIC: &[u8; 4] = b"BLAT";

/// Samples a lattice of `finest` steps on `[0, T]` in `dims` dimensions.
/// Dimension `j` is drawn from `derive_stream(key with substream + j)`.
pub fn sample_lattice(key: StreamKey, horizon: f64, dims: usize, finest: usize) -> Result<BrownianLattice> {
    require_power_of_two("finest_n", finest)?;
    if !(horizon > 0.0) || !horizon.is_finite() {
        return Err(Error::param("T", format!("horizon must be positive, got {horizon}")));
    }
    if dims == 0 {
        return Err(Error::param("m", "at least one noise dimension is required"));
    }
    let std = (horizon / finest as f64).sqrt();
    let q = quantum_exp_for(std);
    let scale = pow2(q);
    let mut units = Vec::with_capacity(dims * finest);
    for j in 0..dims {
        let mut stream = derive_stream(key.with_substream(key.substream + j as u32));
        for _ in 0..finest {
            units.push((stream.gaussian() * std / scale).round() as i128);
        }
    }
    Ok(BrownianLattice {
        horizon_bits: horizon.to_bits(),
        dims,
        finest,
        seed: key.seed,
        quantum_exp: q,
        units,
    })
}
