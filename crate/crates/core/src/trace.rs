//! Per-run records of the optimization iterate.

/// One stored iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iteration: u64,
    /// Position of every particle, in particle order.
    pub positions: Vec<Vec<f64>>,
    /// Temperature held by every particle at this iteration.
    pub temperatures: Vec<f64>,
    /// Objective value of the optimization iterate (the low-temperature
    /// position).
    pub value: f64,
    /// Running minimum of the objective over every iteration so far,
    /// including iterations skipped by thinning.
    pub best_so_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub stride: u64,
    pub records: Vec<TraceRecord>,
    /// Iterations at which a swap fired (strictly increasing).
    pub swap_events: Vec<u64>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn iterations(&self) -> Vec<u64> {
        self.records.iter().map(|r| r.iteration).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.value).collect()
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_so_far).collect()
    }

    pub fn final_best(&self) -> Option<f64> {
        self.records.last().map(|r| r.best_so_far)
    }

    pub fn swap_count(&self) -> u64 {
        self.swap_events.len() as u64
    }
}

/// Builds a [`Trace`] while a run advances. `observe` must be called for every
/// iteration (including 0) so the running minimum sees every iterate.
#[derive(Debug)]
pub(crate) struct TraceRecorder {
    stride: u64,
    last: u64,
    best: f64,
    trace: Trace,
}

impl TraceRecorder {
    /// `last` is the final iteration index, which is always stored.
    pub(crate) fn new(stride: u64, last: u64) -> Self {
        let stride = stride.max(1);
        let capacity = (last / stride + 2) as usize;
        Self {
            stride,
            last,
            best: f64::INFINITY,
            trace: Trace {
                stride,
                records: Vec::with_capacity(capacity),
                swap_events: Vec::new(),
            },
        }
    }

    pub(crate) fn observe(
        &mut self,
        iteration: u64,
        value: f64,
        positions: impl FnOnce() -> Vec<Vec<f64>>,
        temperatures: impl FnOnce() -> Vec<f64>,
    ) {
        self.best = self.best.min(value);
        if iteration % self.stride == 0 || iteration == self.last {
            self.trace.records.push(TraceRecord {
                iteration,
                positions: positions(),
                temperatures: temperatures(),
                value,
                best_so_far: self.best,
            });
        }
    }

    pub(crate) fn swap(&mut self, iteration: u64) {
        self.trace.swap_events.push(iteration);
    }

    pub(crate) fn finish(self) -> Trace {
        self.trace
    }
}
