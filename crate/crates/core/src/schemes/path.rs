use super::{SchemeId, Stepper, StepperConfig};
use crate::brownian::{BrownianLattice, IncrementSequence, TimeGrid};
use crate::error::{Error, Result};
use crate::models::{Model, MAX_DIM};
use crate::real::Real;

/// Per-path event counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PathStats {
    /// Steps after which some constrained coordinate is negative.
    pub negative_steps: usize,
    /// Steps after which the state is outside the open domain.
    pub domain_exits: usize,
    /// Index of the first non-finite node, if any.
    pub overflow_at: Option<usize>,
}

/// A simulated trajectory on a uniform grid.
#[derive(Debug, Clone)]
pub struct SamplePath<T> {
    grid: TimeGrid<T>,
    dims: usize,
    /// Node-major: `values[k * dims + i]`.
    values: Vec<T>,
    scheme: Option<SchemeId>,
    stats: PathStats,
}

impl<T: Real> SamplePath<T> {
    pub fn grid(&self) -> TimeGrid<T> {
        self.grid
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn steps(&self) -> usize {
        self.grid.steps()
    }

    /// `None` for exact solution paths.
    pub fn scheme(&self) -> Option<SchemeId> {
        self.scheme
    }

    /// Path from node values laid out as `values[k * dims + i]`, e.g. an exact
    /// solution sampled on `grid`.
    pub fn from_nodes(grid: TimeGrid<T>, dims: usize, values: Vec<T>) -> Result<Self> {
        if dims == 0 || dims > MAX_DIM || values.len() != (grid.steps() + 1) * dims {
            return Err(Error::Grid(format!(
                "{} values do not fill {} nodes of dimension {dims}",
                values.len(),
                grid.steps() + 1
            )));
        }
        let overflow_at = (0..=grid.steps()).find(|&k| values[k * dims..(k + 1) * dims].iter().any(|v| !v.is_finite()));
        Ok(SamplePath {
            grid,
            dims,
            values,
            scheme: None,
            stats: PathStats {
                overflow_at,
                ..PathStats::default()
            },
        })
    }

    pub fn state(&self, k: usize) -> &[T] {
        &self.values[k * self.dims..(k + 1) * self.dims]
    }

    pub fn terminal(&self) -> &[T] {
        self.state(self.steps())
    }

    pub fn component(&self, i: usize) -> Vec<T> {
        self.values.iter().skip(i).step_by(self.dims).copied().collect()
    }

    pub fn stats(&self) -> PathStats {
        self.stats
    }

    pub fn negative_step_count(&self) -> usize {
        self.stats.negative_steps
    }

    pub fn domain_exit_count(&self) -> usize {
        self.stats.domain_exits
    }

    /// Nodes from the first non-finite value on carry that value.
    pub fn overflowed(&self) -> bool {
        self.stats.overflow_at.is_some()
    }

    /// Piecewise linear interpolation between nodes.
    pub fn interpolate(&self, t: T) -> [T; MAX_DIM] {
        let n = self.steps();
        let s = (t / self.grid.dt()).max(T::zero()).min(T::from_usize(n).unwrap());
        let k = s.floor().to_usize().unwrap_or(0).min(n.saturating_sub(1));
        let w = s - T::from_usize(k).unwrap();
        let mut out = [T::zero(); MAX_DIM];
        let (a, b) = (self.state(k), self.state((k + 1).min(n)));
        for i in 0..self.dims {
            out[i] = a[i] + w * (b[i] - a[i]);
        }
        out
    }
}

impl<T: Real> Stepper<T> {
    /// Runs the scheme over `inc`, calling `visit(k, x_k)` at every node up
    /// to and including the first non-finite one.
    pub fn run(&self, inc: &IncrementSequence<T>, mut visit: impl FnMut(usize, &[T])) -> Result<PathStats> {
        if inc.dims() != self.noise_dim() {
            return Err(Error::Grid(format!(
                "model needs {} Brownian components, increments carry {}",
                self.noise_dim(),
                inc.dims()
            )));
        }
        let d = self.state_dim();
        let m = inc.dims();
        let dt = inc.grid().dt();
        let dom = self.model().base_domain();
        let mut stats = PathStats::default();
        let mut x = self.initial_state();
        let mut dw = [T::zero(); MAX_DIM];
        visit(0, &x[..d]);
        for k in 0..inc.steps() {
            inc.step_into(k, &mut dw);
            self.step(&mut x, dt, &dw[..m])?;
            if x[..d].iter().any(|v| !v.is_finite()) {
                stats.overflow_at = Some(k + 1);
                visit(k + 1, &x[..d]);
                break;
            }
            if (0..d).any(|i| dom.is_constrained(i) && x[i] < T::zero()) {
                stats.negative_steps += 1;
            }
            if !dom.contains(&x[..d]) {
                stats.domain_exits += 1;
            }
            visit(k + 1, &x[..d]);
        }
        Ok(stats)
    }

    /// Terminal state and counters without storing the path.
    pub fn terminal(&self, inc: &IncrementSequence<T>) -> Result<([T; MAX_DIM], PathStats)> {
        let d = self.state_dim();
        let mut last = [T::zero(); MAX_DIM];
        let stats = self.run(inc, |_, x| last[..d].copy_from_slice(x))?;
        Ok((last, stats))
    }

    pub fn simulate(&self, inc: &IncrementSequence<T>) -> Result<SamplePath<T>> {
        let d = self.state_dim();
        let n = inc.steps();
        let mut values = Vec::with_capacity((n + 1) * d);
        let stats = self.run(inc, |_, x| values.extend_from_slice(x))?;
        if stats.overflow_at.is_some() {
            let bad = values[values.len() - d..].to_vec();
            while values.len() < (n + 1) * d {
                values.extend_from_slice(&bad);
            }
        }
        Ok(SamplePath {
            grid: inc.grid(),
            dims: d,
            values,
            scheme: Some(self.scheme()),
            stats,
        })
    }
}

/// Simulates one path of `model` on the `n`-step aggregation of `lattice`.
pub fn simulate_path<T: Real>(
    config: &StepperConfig<T>,
    model: &Model<T>,
    lattice: &BrownianLattice,
    n: usize,
) -> Result<SamplePath<T>> {
    let stepper = Stepper::new(config, model)?;
    let inc = lattice.increments_at::<T>(n)?;
    stepper.simulate(&inc)
}
