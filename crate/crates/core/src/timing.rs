use std::time::Instant;

/// Runs `region` and returns its result with the elapsed monotonic wall time
/// in nanoseconds. The reported duration is at least 1 ns.
pub fn measure_runtime<T>(region: impl FnOnce() -> T) -> (T, u64) {
    let start = Instant::now();
    let out = region();
    let ns = start.elapsed().as_nanos().clamp(1, u128::from(u64::MAX)) as u64;
    (out, ns)
}

pub fn ns_to_ms(ns: u64) -> f64 {
    ns as f64 / 1e6
}
