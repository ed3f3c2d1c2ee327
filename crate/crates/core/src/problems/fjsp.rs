//! Flexible job-shop scheduling.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ObjectiveSet, ObjectiveVector, ProblemError};

pub type ProcTime = u32;

/// Ranges used by [`generate_fjsp`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FjspGenConfig {
    pub ops_per_job: (usize, usize),
    pub proc_time: (ProcTime, ProcTime),
}

impl Default for FjspGenConfig {
    fn default() -> Self {
        Self { ops_per_job: (4, 8), proc_time: (2, 20) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FjspData {
    num_jobs: usize,
    num_machines: usize,
    ops_per_job: Vec<usize>,
    /// `proc_time[job][op][machine]`, `null` where the machine is ineligible.
    proc_time: Vec<Vec<Vec<Option<ProcTime>>>>,
}

/// A flexible job-shop instance.
///
/// Operations are also addressed by a flat index: job `j`'s `k`-th operation
/// is `op_offset(j) + k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FjspData", into = "FjspData")]
pub struct FjspInstance {
    data: FjspData,
    op_offset: Vec<usize>,
    /// Per flat operation: eligible `(machine, time)` pairs, machine ascending.
    eligible: Vec<Vec<(usize, ProcTime)>>,
}

impl TryFrom<FjspData> for FjspInstance {
    type Error = ProblemError;

    fn try_from(data: FjspData) -> Result<Self, ProblemError> {
        FjspInstance::new(data.num_machines, data.proc_time)
    }
}

impl From<FjspInstance> for FjspData {
    fn from(inst: FjspInstance) -> Self {
        inst.data
    }
}

impl FjspInstance {
    /// Builds an instance from a `[job][op][machine]` processing-time table.
    pub fn new(num_machines: usize, proc_time: Vec<Vec<Vec<Option<ProcTime>>>>) -> Result<Self, ProblemError> {
        if num_machines == 0 {
            return Err(ProblemError::InvalidCount { what: "machines", value: 0 });
        }
        if proc_time.is_empty() {
            return Err(ProblemError::InvalidCount { what: "jobs", value: 0 });
        }
        let mut op_offset = Vec::with_capacity(proc_time.len());
        let mut eligible = Vec::new();
        for (j, job) in proc_time.iter().enumerate() {
            if job.is_empty() {
                return Err(ProblemError::InvalidInstance(format!("job {j} has no operations")));
            }
            op_offset.push(eligible.len());
            for (k, op) in job.iter().enumerate() {
                if op.len() != num_machines {
                    return Err(ProblemError::InvalidInstance(format!(
                        "operation ({j},{k}) lists {} machines, expected {num_machines}",
                        op.len()
                    )));
                }
                let choices: Vec<_> = op.iter().enumerate().filter_map(|(m, t)| t.map(|t| (m, t))).collect();
                if choices.is_empty() {
                    return Err(ProblemError::InvalidInstance(format!("operation ({j},{k}) has no eligible machine")));
                }
                eligible.push(choices);
            }
        }
        let data = FjspData {
            num_jobs: proc_time.len(),
            num_machines,
            ops_per_job: proc_time.iter().map(Vec::len).collect(),
            proc_time,
        };
        Ok(Self { data, op_offset, eligible })
    }

    pub fn num_jobs(&self) -> usize {
        self.data.num_jobs
    }

    pub fn num_machines(&self) -> usize {
        self.data.num_machines
    }

    pub fn ops_per_job(&self) -> &[usize] {
        &self.data.ops_per_job
    }

    pub fn num_operations(&self) -> usize {
        self.eligible.len()
    }

    pub fn op_offset(&self, job: usize) -> usize {
        self.op_offset[job]
    }

    /// Processing time of job `job`'s operation `op` on `machine`, if eligible.
    pub fn proc_time(&self, job: usize, op: usize, machine: usize) -> Option<ProcTime> {
        self.data.proc_time[job][op][machine]
    }

    pub fn proc_table(&self) -> &[Vec<Vec<Option<ProcTime>>>] {
        &self.data.proc_time
    }

    /// Eligible `(machine, time)` pairs of a flat operation index.
    pub fn eligible(&self, flat_op: usize) -> &[(usize, ProcTime)] {
        &self.eligible[flat_op]
    }

    /// Job multiset in canonical order: job `j` repeated `ops_per_job[j]` times.
    pub fn job_multiset(&self) -> Vec<usize> {
        self.data.ops_per_job.iter().enumerate().flat_map(|(j, &n)| std::iter::repeat_n(j, n)).collect()
    }
}

/// Generates a random instance. Deterministic in `seed`.
pub fn generate_fjsp(
    seed: u64,
    num_jobs: usize,
    num_machines: usize,
    cfg: &FjspGenConfig,
) -> Result<FjspInstance, ProblemError> {
    if num_jobs == 0 {
        return Err(ProblemError::InvalidCount { what: "jobs", value: num_jobs });
    }
    if num_machines == 0 {
        return Err(ProblemError::InvalidCount { what: "machines", value: num_machines });
    }
    let (op_lo, op_hi) = cfg.ops_per_job;
    if op_lo > op_hi {
        return Err(ProblemError::InvalidRange { what: "ops_per_job", min: op_lo as u64, max: op_hi as u64 });
    }
    if op_lo == 0 {
        return Err(ProblemError::InvalidCount { what: "ops_per_job minimum", value: 0 });
    }
    let (t_lo, t_hi) = cfg.proc_time;
    if t_lo > t_hi {
        return Err(ProblemError::InvalidRange { what: "proc_time", min: t_lo as u64, max: t_hi as u64 });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Vec::with_capacity(num_jobs);
    for _ in 0..num_jobs {
        let n_ops = rng.random_range(op_lo..=op_hi);
        let mut job = Vec::with_capacity(n_ops);
        for _ in 0..n_ops {
            let n_eligible = rng.random_range(1..=num_machines);
            let mut machines = sample(&mut rng, num_machines, n_eligible).into_vec();
            machines.sort_unstable();
            let mut row = vec![None; num_machines];
            for m in machines {
                row[m] = Some(rng.random_range(t_lo..=t_hi));
            }
            job.push(row);
        }
        table.push(job);
    }
    FjspInstance::new(num_machines, table)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduledOp {
    pub job: usize,
    pub op: usize,
    pub machine: usize,
    pub start: u64,
    pub end: u64,
}

/// A decoded schedule: one entry per operation, in dispatch order.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Schedule {
    pub ops: Vec<ScheduledOp>,
}

/// Semi-active decoding of a machine-selection / operation-sequence pair.
///
/// `machine_selection[flat_op]` indexes into that operation's eligible list;
/// the `k`-th occurrence of job `j` in `operation_sequence` is operation
/// `(j, k)`. Each operation starts at the later of its machine's release and
/// its job predecessor's completion.
pub fn decode_semi_active(inst: &FjspInstance, machine_selection: &[usize], operation_sequence: &[usize]) -> Schedule {
    let mut next_op = vec![0usize; inst.num_jobs()];
    let mut job_ready = vec![0u64; inst.num_jobs()];
    let mut machine_free = vec![0u64; inst.num_machines()];
    let mut ops = Vec::with_capacity(operation_sequence.len());
    for &job in operation_sequence {
        let op = next_op[job];
        next_op[job] += 1;
        let flat = inst.op_offset(job) + op;
        let (machine, time) = inst.eligible(flat)[machine_selection[flat]];
        let start = job_ready[job].max(machine_free[machine]);
        let end = start + u64::from(time);
        job_ready[job] = end;
        machine_free[machine] = end;
        ops.push(ScheduledOp { job, op, machine, start, end });
    }
    Schedule { ops }
}

/// Checks precedence, eligibility, durations, machine exclusivity and
/// completeness of a schedule.
pub fn validate_schedule(inst: &FjspInstance, schedule: &Schedule) -> Result<(), ProblemError> {
    let mut seen: Vec<Option<ScheduledOp>> = vec![None; inst.num_operations()];
    for s in &schedule.ops {
        if s.job >= inst.num_jobs() || s.op >= inst.ops_per_job()[s.job] {
            return Err(ProblemError::InfeasibleSchedule(format!("unknown operation ({},{})", s.job, s.op)));
        }
        if s.machine >= inst.num_machines() {
            return Err(ProblemError::InfeasibleSchedule(format!("unknown machine {}", s.machine)));
        }
        let Some(time) = inst.proc_time(s.job, s.op, s.machine) else {
            return Err(ProblemError::InfeasibleSchedule(format!(
                "operation ({},{}) is not eligible on machine {}",
                s.job, s.op, s.machine
            )));
        };
        if s.end < s.start || s.end - s.start != u64::from(time) {
            return Err(ProblemError::InfeasibleSchedule(format!(
                "operation ({},{}) runs {}..{} but takes {time} on machine {} (preemption or wrong duration)",
                s.job, s.op, s.start, s.end, s.machine
            )));
        }
        let slot = &mut seen[inst.op_offset(s.job) + s.op];
        if slot.is_some() {
            return Err(ProblemError::InfeasibleSchedule(format!("operation ({},{}) scheduled twice", s.job, s.op)));
        }
        *slot = Some(*s);
    }
    for j in 0..inst.num_jobs() {
        for k in 0..inst.ops_per_job()[j] {
            let Some(cur) = seen[inst.op_offset(j) + k] else {
                return Err(ProblemError::InfeasibleSchedule(format!("operation ({j},{k}) is not scheduled")));
            };
            if k > 0 {
                let prev = seen[inst.op_offset(j) + k - 1].expect("checked above");
                if cur.start < prev.end {
                    return Err(ProblemError::InfeasibleSchedule(format!(
                        "precedence violated: ({j},{k}) starts at {} before ({j},{}) ends at {}",
                        cur.start,
                        k - 1,
                        prev.end
                    )));
                }
            }
        }
    }
    let mut per_machine: Vec<Vec<(u64, u64, usize, usize)>> = vec![Vec::new(); inst.num_machines()];
    for s in &schedule.ops {
        per_machine[s.machine].push((s.start, s.end, s.job, s.op));
    }
    for (m, list) in per_machine.iter_mut().enumerate() {
        list.sort_unstable();
        for w in list.windows(2) {
            if w[1].0 < w[0].1 {
                return Err(ProblemError::InfeasibleSchedule(format!(
                    "machine {m} overlap: ({},{}) and ({},{})",
                    w[0].2, w[0].3, w[1].2, w[1].3
                )));
            }
        }
    }
    Ok(())
}

/// Objectives of a schedule assumed feasible:
/// `[C_max, W_bal, F_avg, W_total, F_max]` truncated to the objective set.
pub fn schedule_objectives(inst: &FjspInstance, schedule: &Schedule, set: ObjectiveSet) -> ObjectiveVector {
    let mut workload = vec![0u64; inst.num_machines()];
    let mut first_start = vec![u64::MAX; inst.num_jobs()];
    let mut last_end = vec![0u64; inst.num_jobs()];
    for s in &schedule.ops {
        workload[s.machine] += s.end - s.start;
        first_start[s.job] = first_start[s.job].min(s.start);
        last_end[s.job] = last_end[s.job].max(s.end);
    }
    let makespan = last_end.iter().copied().max().unwrap_or(0);
    let w_max = workload.iter().copied().max().unwrap_or(0);
    let w_min = workload.iter().copied().min().unwrap_or(0);
    let w_total: u64 = workload.iter().sum();
    let flows: Vec<u64> = first_start.iter().zip(&last_end).map(|(&s, &e)| e.saturating_sub(s)).collect();
    let f_sum: u64 = flows.iter().sum();
    let f_max = flows.iter().copied().max().unwrap_or(0);
    let all = [
        makespan as f64,
        (w_max - w_min) as f64,
        f_sum as f64 / inst.num_jobs() as f64,
        w_total as f64,
        f_max as f64,
    ];
    ObjectiveVector(all[..set.len()].to_vec())
}

/// Validates `schedule` and returns its objective vector.
pub fn evaluate_fjsp(inst: &FjspInstance, schedule: &Schedule, set: ObjectiveSet) -> Result<ObjectiveVector, ProblemError> {
    validate_schedule(inst, schedule)?;
    Ok(schedule_objectives(inst, schedule, set))
}
