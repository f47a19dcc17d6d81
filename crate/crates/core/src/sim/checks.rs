//! Structural checks on simulated traces and trace export.

use std::collections::BTreeMap;
use std::io::{self, Write};

use super::TaskRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Transmission,
    Computation,
}

impl Stage {
    fn span(self, r: &TaskRecord) -> (f64, f64, f64) {
        match self {
            Stage::Transmission => (r.gen_time, r.tx_start, r.tx_end),
            Stage::Computation => (r.tx_end, r.comp_start, r.comp_end),
        }
    }

    fn applies(self, r: &TaskRecord) -> bool {
        // direct Poisson interferers skip transmission: zero-length span
        self == Stage::Computation || r.tx_end > r.gen_time || r.tx_start > r.gen_time
    }
}

/// Per source, generation order equals delivery order.
pub fn check_fifo(records: &[TaskRecord]) -> Result<(), String> {
    let mut last: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    let mut sorted: Vec<&TaskRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.gen_time.total_cmp(&b.gen_time));
    for r in sorted {
        if let Some(&(g, d)) = last.get(&r.source_id) {
            if r.comp_end < d {
                return Err(format!(
                    "source {}: task generated at {} delivered at {} before task generated at {g} (delivered {d})",
                    r.source_id, r.gen_time, r.comp_end
                ));
            }
        }
        last.insert(r.source_id, (r.gen_time, r.comp_end));
    }
    Ok(())
}

/// Every service starts at `max(arrival, previous departure)` in arrival
/// order: the server never idles with work waiting, and the queue is FIFO.
///
/// The transmission stage is checked per source, the computation stage
/// over all sources.
pub fn check_work_conservation(records: &[TaskRecord]) -> Result<(), String> {
    let mut by_source: BTreeMap<u32, Vec<&TaskRecord>> = BTreeMap::new();
    for r in records {
        by_source.entry(r.source_id).or_default().push(r);
    }
    for (src, rs) in &by_source {
        if rs.iter().all(|r| Stage::Transmission.applies(r)) {
            scan(rs.clone(), Stage::Transmission).map_err(|e| format!("transmission, source {src}: {e}"))?;
        }
    }
    scan(records.iter().collect(), Stage::Computation).map_err(|e| format!("computation: {e}"))
}

fn scan(mut rs: Vec<&TaskRecord>, stage: Stage) -> Result<(), String> {
    rs.sort_by(|a, b| stage.span(a).0.total_cmp(&stage.span(b).0));
    let mut prev_end = f64::NEG_INFINITY;
    for r in rs {
        let (arr, start, end) = stage.span(r);
        let expect = arr.max(prev_end);
        if start != expect {
            return Err(format!("service started at {start}, expected {expect} (arrival {arr})"));
        }
        prev_end = end;
    }
    Ok(())
}

/// Little's law at one stage for the given records: returns
/// `(time-average number in stage, throughput * mean sojourn)` over the
/// window spanned by the records' arrivals.
pub fn littles_law(records: &[TaskRecord], stage: Stage) -> (f64, f64) {
    let spans: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| stage.applies(r))
        .map(|r| {
            let (a, _, d) = stage.span(r);
            (a, d)
        })
        .collect();
    let t0 = spans.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let t1 = spans.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    let len = t1 - t0;
    let occupied: f64 = spans.iter().map(|&(a, d)| (d.min(t1) - a).max(0.0)).sum();
    let sojourn: f64 = spans.iter().map(|&(a, d)| d - a).sum();
    (occupied / len, sojourn / len)
}

/// Mean and variance of the gaps between successive transmission
/// departures of the given (single-source) records.
pub fn departure_gap_moments(records: &[TaskRecord]) -> (f64, f64) {
    let gaps: Vec<f64> = records.windows(2).map(|w| w[1].tx_end - w[0].tx_end).collect();
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let var = gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// CSV trace, one row per task, with a header row.
pub fn write_trace_csv<W: Write>(records: &[TaskRecord], mut w: W) -> io::Result<()> {
    writeln!(w, "source_id,gen_time,tx_start,tx_end,comp_start,comp_end")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            r.source_id, r.gen_time, r.tx_start, r.tx_end, r.comp_start, r.comp_end
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(src: u32, g: f64, ts: f64, te: f64, cs: f64, ce: f64) -> TaskRecord {
        TaskRecord {
            source_id: src,
            gen_time: g,
            tx_start: ts,
            tx_end: te,
            comp_start: cs,
            comp_end: ce,
        }
    }

    #[test]
    fn detects_idle_server() {
        let ok = [rec(0, 0.0, 0.0, 1.0, 1.0, 2.0), rec(0, 0.5, 1.0, 1.5, 2.0, 2.5)];
        assert!(check_work_conservation(&ok).is_ok());
        let idle = [rec(0, 0.0, 0.0, 1.0, 1.0, 2.0), rec(0, 0.5, 1.2, 1.5, 2.0, 2.5)];
        assert!(check_work_conservation(&idle).is_err());
    }

    #[test]
    fn detects_overtaking() {
        let bad = [rec(0, 0.0, 0.0, 1.0, 1.0, 3.0), rec(0, 0.5, 1.0, 1.5, 1.5, 2.0)];
        assert!(check_fifo(&bad).is_err());
    }

    #[test]
    fn trace_has_header() {
        let mut buf = Vec::new();
        write_trace_csv(&[rec(0, 0.0, 0.0, 1.0, 1.0, 2.0)], &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "source_id,gen_time,tx_start,tx_end,comp_start,comp_end\n0,0,0,1,1,2\n");
    }
}
