use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use super::{Interferers, Policy, SimConfig, TaskRecord, TAGGED};
use crate::analytic::{MultiSourceRates, TandemRates, STABILITY_EPS};
use crate::error::{non_negative, positive, Error, Result};

// Stream ids within one replica block of 16.
const S_GEN: u64 = 0;
const S_TX: u64 = 1;
const S_COMP: u64 = 2;
const S_DIRECT: u64 = 3;
const S_IFR: u64 = 4;

fn stream(cfg: &SimConfig, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(16 * cfg.replica as u64 + id);
    rng
}

fn exp(rate: f64) -> Exp<f64> {
    Exp::new(rate).expect("rate validated positive")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    CompDone,
    TxDone(u32),
    Gen(u32),
    Direct,
}

impl Kind {
    // departures before arrivals on exact ties
    fn rank(self) -> u8 {
        match self {
            Kind::CompDone => 0,
            Kind::TxDone(_) => 1,
            Kind::Gen(_) => 2,
            Kind::Direct => 3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    kind: Kind,
    seq: u64,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then(other.kind.rank().cmp(&self.kind.rank()))
            .then(other.seq.cmp(&self.seq))
    }
}

/// One source that owns a transmission queue.
struct TxSource {
    gen: Option<(Exp<f64>, ChaCha8Rng)>,
    svc: Exp<f64>,
    svc_rng: ChaCha8Rng,
    queue: VecDeque<usize>,
    busy: bool,
}

struct Engine {
    now: f64,
    seq: u64,
    events: BinaryHeap<Event>,
    records: Vec<TaskRecord>,
    done: Vec<bool>,
    sources: Vec<TxSource>,
    comp: Exp<f64>,
    comp_rng: ChaCha8Rng,
    comp_queue: VecDeque<usize>,
    comp_busy: bool,
    direct: Option<(Exp<f64>, ChaCha8Rng)>,
    zero_wait: bool,
    target: usize,
    generated: usize,
    completed: usize,
}

impl Engine {
    fn schedule(&mut self, time: f64, kind: Kind) {
        self.seq += 1;
        self.events.push(Event {
            time,
            kind,
            seq: self.seq,
        });
    }

    fn new_task(&mut self, src: u32) -> usize {
        let t = self.now;
        self.records.push(TaskRecord {
            source_id: src,
            gen_time: t,
            tx_start: f64::NAN,
            tx_end: f64::NAN,
            comp_start: f64::NAN,
            comp_end: f64::NAN,
        });
        self.done.push(false);
        if src == TAGGED {
            self.generated += 1;
        }
        self.records.len() - 1
    }

    fn start_tx(&mut self, src: u32) {
        let s = &mut self.sources[src as usize];
        if s.busy {
            return;
        }
        if let Some(&id) = s.queue.front() {
            s.busy = true;
            let d = s.svc.sample(&mut s.svc_rng);
            self.records[id].tx_start = self.now;
            self.schedule(self.now + d, Kind::TxDone(src));
        }
    }

    fn start_comp(&mut self) {
        if self.comp_busy {
            return;
        }
        if let Some(&id) = self.comp_queue.front() {
            self.comp_busy = true;
            let d = self.comp.sample(&mut self.comp_rng);
            self.records[id].comp_start = self.now;
            self.schedule(self.now + d, Kind::CompDone);
        }
    }

    fn schedule_gen(&mut self, src: u32) {
        if src == TAGGED && (self.zero_wait || self.generated >= self.target) {
            return;
        }
        if let Some((d, rng)) = self.sources[src as usize].gen.as_mut() {
            let gap = d.sample(rng);
            self.schedule(self.now + gap, Kind::Gen(src));
        }
    }

    fn generate(&mut self, src: u32) {
        let id = self.new_task(src);
        self.sources[src as usize].queue.push_back(id);
        self.start_tx(src);
    }

    fn run(mut self) -> Vec<TaskRecord> {
        self.generate(TAGGED);
        self.schedule_gen(TAGGED);
        for src in 1..self.sources.len() as u32 {
            self.schedule_gen(src);
        }
        if let Some((d, rng)) = self.direct.as_mut() {
            let gap = d.sample(rng);
            self.schedule(gap, Kind::Direct);
        }
        while self.completed < self.target {
            let ev = self.events.pop().expect("event set never drains before target");
            self.now = ev.time;
            match ev.kind {
                Kind::Gen(src) => {
                    self.generate(src);
                    self.schedule_gen(src);
                }
                Kind::Direct => {
                    let id = self.new_task(1);
                    self.records[id].tx_start = self.now;
                    self.records[id].tx_end = self.now;
                    self.comp_queue.push_back(id);
                    self.start_comp();
                    let (d, rng) = self.direct.as_mut().expect("direct stream");
                    let gap = d.sample(rng);
                    self.schedule(self.now + gap, Kind::Direct);
                }
                Kind::TxDone(src) => {
                    let s = &mut self.sources[src as usize];
                    let id = s.queue.pop_front().expect("busy server has a task");
                    s.busy = false;
                    self.records[id].tx_end = self.now;
                    self.comp_queue.push_back(id);
                    self.start_comp();
                    if src == TAGGED && self.zero_wait && self.generated < self.target {
                        self.generate(TAGGED);
                    } else {
                        self.start_tx(src);
                    }
                }
                Kind::CompDone => {
                    let id = self.comp_queue.pop_front().expect("busy server has a task");
                    self.comp_busy = false;
                    self.records[id].comp_end = self.now;
                    self.done[id] = true;
                    if self.records[id].source_id == TAGGED {
                        self.completed += 1;
                    }
                    self.start_comp();
                }
            }
        }
        let Engine { records, done, .. } = self;
        records
            .into_iter()
            .zip(done)
            .filter_map(|(r, d)| d.then_some(r))
            .collect()
    }
}

fn build(cfg: &SimConfig, lambda: f64, mu_t: f64, mu_c: f64, lambda_other: f64) -> Engine {
    let zero_wait = cfg.policy == Policy::ZeroWait;
    let tagged = TxSource {
        gen: (!zero_wait).then(|| (exp(lambda), stream(cfg, S_GEN))),
        svc: exp(mu_t),
        svc_rng: stream(cfg, S_TX),
        queue: VecDeque::new(),
        busy: false,
    };
    let mut sources = vec![tagged];
    let mut direct = None;
    if lambda_other > 0.0 {
        match cfg.interferers {
            Interferers::Poisson => direct = Some((exp(lambda_other), stream(cfg, S_DIRECT))),
            Interferers::FullTandem { sources: k, mu_t: mt } => {
                for j in 0..k as u64 {
                    sources.push(TxSource {
                        gen: Some((exp(lambda_other / k as f64), stream(cfg, S_IFR + 2 * j))),
                        svc: exp(mt),
                        svc_rng: stream(cfg, S_IFR + 2 * j + 1),
                        queue: VecDeque::new(),
                        busy: false,
                    });
                }
            }
        }
    }
    Engine {
        now: 0.0,
        seq: 0,
        events: BinaryHeap::with_capacity(16),
        records: Vec::with_capacity(cfg.num_tasks + cfg.num_tasks / 4),
        done: Vec::with_capacity(cfg.num_tasks + cfg.num_tasks / 4),
        sources,
        comp: exp(mu_c),
        comp_rng: stream(cfg, S_COMP),
        comp_queue: VecDeque::new(),
        comp_busy: false,
        direct,
        zero_wait,
        target: cfg.num_tasks,
        generated: 0,
        completed: 0,
    }
}

fn guard(ok: bool, allow: bool, constraint: &str) -> Result<()> {
    if ok || allow {
        Ok(())
    } else {
        Err(Error::unstable(constraint))
    }
}

fn lt(a: f64, b: f64) -> bool {
    a < (1.0 - STABILITY_EPS) * b
}

/// Single-source tandem. Under [`Policy::ZeroWait`] `rates.lambda` is ignored.
///
/// Returns every completed task in generation order.
pub fn simulate_tandem(rates: TandemRates, cfg: &SimConfig) -> Result<Vec<TaskRecord>> {
    cfg.validate()?;
    positive("mu_t", rates.mu_t)?;
    positive("mu_c", rates.mu_c)?;
    let allow = cfg.allow_unstable;
    match cfg.policy {
        Policy::Stochastic => {
            positive("lambda", rates.lambda)?;
            guard(lt(rates.lambda, rates.mu_t), allow, "lambda < mu_t")?;
            guard(lt(rates.lambda, rates.mu_c), allow, "lambda < mu_c")?;
        }
        Policy::ZeroWait => guard(lt(rates.mu_t, rates.mu_c), allow, "mu_t < mu_c")?,
    }
    Ok(build(cfg, rates.lambda, rates.mu_t, rates.mu_c, 0.0).run())
}

/// Tagged source behind its own transmission queue, sharing the
/// computation queue with other sources (source id 1 for the aggregate
/// Poisson stream, 1..=k for full-tandem interferers). Under
/// [`Policy::ZeroWait`] `rates.lambda_i` is ignored.
pub fn simulate_multisource(rates: MultiSourceRates, cfg: &SimConfig) -> Result<Vec<TaskRecord>> {
    cfg.validate()?;
    positive("mu_it", rates.mu_it)?;
    positive("mu_c", rates.mu_c)?;
    non_negative("lambda_other", rates.lambda_other)?;
    let allow = cfg.allow_unstable;
    let lo = rates.lambda_other;
    match cfg.policy {
        Policy::Stochastic => {
            positive("lambda_i", rates.lambda_i)?;
            guard(lt(rates.lambda_i, rates.mu_it), allow, "lambda_i < mu_it")?;
            guard(
                lt(rates.lambda_i + lo, rates.mu_c),
                allow,
                "lambda_i + lambda_other < mu_c",
            )?;
        }
        Policy::ZeroWait => guard(
            lt(rates.mu_it + lo, rates.mu_c),
            allow,
            "mu_it + lambda_other < mu_c",
        )?,
    }
    if let Interferers::FullTandem { mu_t, sources } = cfg.interferers {
        if lo > 0.0 {
            guard(
                lt(lo / sources as f64, mu_t),
                allow,
                "lambda_other / sources < interferer mu_t",
            )?;
        }
    }
    Ok(build(cfg, rates.lambda_i, rates.mu_it, rates.mu_c, lo).run())
}

/// Records of the tagged source only.
pub fn tagged(records: &[TaskRecord]) -> Vec<TaskRecord> {
    records.iter().filter(|r| r.source_id == TAGGED).copied().collect()
}
