//! Batch pipeline: enumerate the window, precompute per batch on a worker
//! pool, scan each discriminant, and append records in modulus order with
//! a checksummed checkpoint after every batch. Output bytes are a pure
//! function of the job config, so kill-resume and any worker count give
//! identical files.

use crate::error::CliError;
use crate::zerofile::{record_line, Header};
use qz_core::engine::T_BOX;
use qz_core::{
    build_plan, enumerate_range, evaluate_fast_with_stats, precompute_batch, scan_zeros_with,
    CriticalLinePoint, DiscriminantRange, EvaluationPlan, FundamentalDiscriminant, ScanConfig,
    SharedPowerTable, Sign,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};
use std::sync::mpsc;
use std::sync::{Arc, Mutex};
use std::time::Duration;

#[derive(Debug, Clone)]
pub struct JobConfig {
    pub x_min: u64,
    pub span: u64,
    pub digits: u32,
    pub t_max: f64,
    pub step_divisor: u32,
    pub batch: usize,
    pub workers: usize,
    pub sign: Sign,
    pub out: PathBuf,
    pub checkpoint: PathBuf,
}

impl JobConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.batch == 0 {
            return Err(CliError::usage("--batch must be at least 1"));
        }
        if self.workers == 0 {
            return Err(CliError::usage("--workers must be at least 1"));
        }
        if self.digits == 0 || self.digits > 18 {
            return Err(CliError::usage("--digits must lie in 1..=18"));
        }
        if self.span == 0 {
            return Err(CliError::usage("--span must be at least 1"));
        }
        if self.x_min == 0 || self.x_min.checked_add(self.span).is_none() {
            return Err(CliError::usage("window [x_min, x_min + span) out of range"));
        }
        if !(self.t_max > 0.0 && self.t_max <= T_BOX) {
            return Err(CliError::usage("--t-max must lie in (0, 1.25]"));
        }
        Ok(())
    }

    pub fn header(&self) -> Header {
        Header {
            x_min: self.x_min,
            span: self.span,
            digits: self.digits,
            t_max: self.t_max,
            step_divisor: self.step_divisor,
            sign: self.sign,
        }
    }

    fn sign_code(&self) -> i8 {
        match self.sign {
            Sign::Negative => -1,
            Sign::Positive => 1,
        }
    }
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
struct Checkpoint {
    version: u32,
    x_min: u64,
    span: u64,
    digits: u32,
    t_max: f64,
    step_divisor: u32,
    batch: usize,
    sign: i8,
    batches_done: u64,
    /// First modulus not yet covered by a flushed batch.
    next_modulus: u64,
    output_len: u64,
    output_sha256: String,
    discs_done: u64,
    zeros_done: u64,
    complete: bool,
}

impl Checkpoint {
    fn matches(&self, cfg: &JobConfig) -> bool {
        self.version == 1
            && self.x_min == cfg.x_min
            && self.span == cfg.span
            && self.digits == cfg.digits
            && self.t_max == cfg.t_max
            && self.step_divisor == cfg.step_divisor
            && self.batch == cfg.batch
            && self.sign == cfg.sign_code()
    }
}

fn write_checkpoint(path: &Path, ck: &Checkpoint) -> Result<(), CliError> {
    let tmp = path.with_extension("tmp");
    let body = serde_json::to_string_pretty(ck)
        .map_err(|e| CliError::io(format!("encode checkpoint: {e}")))?;
    fs::write(&tmp, body).map_err(|e| CliError::io(format!("write {}: {e}", tmp.display())))?;
    fs::rename(&tmp, path)
        .map_err(|e| CliError::io(format!("commit {}: {e}", path.display())))?;
    Ok(())
}

fn sha_hex(hasher: &Sha256) -> String {
    let digest = hasher.clone().finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

struct BatchJob {
    idx: u64,
    discs: Vec<FundamentalDiscriminant>,
}

struct BatchOut {
    idx: u64,
    lines: String,
    discs: u64,
    zeros: u64,
    power_mults: u64,
    kernel_evals: u64,
    last_modulus: u64,
}

fn compute_batch(
    plan: &Arc<EvaluationPlan>,
    shared: &SharedPowerTable,
    scan: &ScanConfig,
    job: BatchJob,
) -> Result<BatchOut, CliError> {
    let tables = precompute_batch(&job.discs, plan, shared).map_err(CliError::from)?;
    let mut out = BatchOut {
        idx: job.idx,
        lines: String::new(),
        discs: job.discs.len() as u64,
        zeros: 0,
        power_mults: 0,
        kernel_evals: 0,
        last_modulus: job.discs.last().map_or(0, |d| d.modulus()),
    };
    for table in tables {
        out.power_mults += table.power_mults();
        let parity = table.plan.parity;
        let mut kernel = 0u64;
        let zeros = scan_zeros_with(table.owner.modulus(), scan, |t| {
            let (v, stats) = evaluate_fast_with_stats(&table, CriticalLinePoint::new(t, parity))?;
            kernel += stats.kernel_evals;
            Ok(v)
        })
        .map_err(|e| {
            CliError::usage(format!("scan of {} failed: {e}", table.owner.disc()))
        })?;
        out.kernel_evals += kernel;
        out.zeros += zeros.len() as u64;
        out.lines.push_str(&record_line(table.owner.disc(), &zeros));
    }
    Ok(out)
}

struct Writer {
    file: File,
    hasher: Sha256,
    len: u64,
}

impl Writer {
    fn append(&mut self, bytes: &[u8]) -> Result<(), CliError> {
        self.file
            .write_all(bytes)
            .map_err(|e| CliError::io(format!("write output: {e}")))?;
        self.hasher.update(bytes);
        self.len += bytes.len() as u64;
        Ok(())
    }
}

enum Resume {
    Fresh,
    Continue(Checkpoint),
    AlreadyComplete,
}

fn load_resume_state(cfg: &JobConfig) -> Result<Resume, CliError> {
    let raw = match fs::read_to_string(&cfg.checkpoint) {
        Ok(raw) => raw,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Resume::Fresh),
        Err(e) => return Err(CliError::io(format!("read checkpoint: {e}"))),
    };
    let ck: Checkpoint = serde_json::from_str(&raw)
        .map_err(|e| CliError::io(format!("corrupt checkpoint: {e}")))?;
    if !ck.matches(cfg) {
        return Err(CliError::io(
            "checkpoint belongs to a different job config; remove it to start over".to_string(),
        ));
    }
    if !cfg.out.exists() {
        return Err(CliError::io(
            "checkpoint present but output file missing; remove the checkpoint to start over"
                .to_string(),
        ));
    }
    if ck.complete {
        return Ok(Resume::AlreadyComplete);
    }
    Ok(Resume::Continue(ck))
}

/// Truncate the output to the checkpointed prefix and verify its checksum,
/// leaving the hasher primed to continue.
fn reopen_output(cfg: &JobConfig, ck: &Checkpoint) -> Result<Writer, CliError> {
    let mut file = OpenOptions::new()
        .read(true)
        .write(true)
        .open(&cfg.out)
        .map_err(|e| CliError::io(format!("open {}: {e}", cfg.out.display())))?;
    let actual_len = file
        .metadata()
        .map_err(|e| CliError::io(format!("stat output: {e}")))?
        .len();
    if actual_len < ck.output_len {
        return Err(CliError::io(format!(
            "output shorter than checkpoint ({} < {} bytes)",
            actual_len, ck.output_len
        )));
    }
    file.set_len(ck.output_len)
        .map_err(|e| CliError::io(format!("truncate output: {e}")))?;
    file.seek(SeekFrom::Start(0))
        .map_err(|e| CliError::io(format!("seek output: {e}")))?;
    let mut hasher = Sha256::new();
    let mut remaining = ck.output_len;
    let mut buf = vec![0u8; 1 << 16];
    while remaining > 0 {
        let want = remaining.min(buf.len() as u64) as usize;
        file.read_exact(&mut buf[..want])
            .map_err(|e| CliError::io(format!("reread output: {e}")))?;
        hasher.update(&buf[..want]);
        remaining -= want as u64;
    }
    if sha_hex(&hasher) != ck.output_sha256 {
        return Err(CliError::io(
            "output prefix does not match the checkpoint checksum".to_string(),
        ));
    }
    file.seek(SeekFrom::End(0))
        .map_err(|e| CliError::io(format!("seek output: {e}")))?;
    Ok(Writer { file, hasher, len: ck.output_len })
}

pub struct JobSummary {
    pub discs: u64,
    pub zeros: u64,
    pub batches: u64,
}

pub fn run_zeros(cfg: &JobConfig) -> Result<JobSummary, CliError> {
    cfg.validate()?;
    let throttle = std::env::var("QZ_BATCH_THROTTLE_MS")
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .map(Duration::from_millis);

    let (mut writer, mut ck) = match load_resume_state(cfg)? {
        Resume::AlreadyComplete => {
            eprintln!("job already complete; nothing to do");
            let ck: Checkpoint = serde_json::from_str(
                &fs::read_to_string(&cfg.checkpoint)
                    .map_err(|e| CliError::io(e.to_string()))?,
            )
            .map_err(|e| CliError::io(e.to_string()))?;
            return Ok(JobSummary {
                discs: ck.discs_done,
                zeros: ck.zeros_done,
                batches: ck.batches_done,
            });
        }
        Resume::Continue(ck) => {
            eprintln!(
                "resuming after batch {} ({} discriminants done)",
                ck.batches_done, ck.discs_done
            );
            (reopen_output(cfg, &ck)?, ck)
        }
        Resume::Fresh => {
            let file = File::create(&cfg.out)
                .map_err(|e| CliError::io(format!("create {}: {e}", cfg.out.display())))?;
            let mut writer = Writer { file, hasher: Sha256::new(), len: 0 };
            writer.append(cfg.header().serialize().as_bytes())?;
            let ck = Checkpoint {
                version: 1,
                x_min: cfg.x_min,
                span: cfg.span,
                digits: cfg.digits,
                t_max: cfg.t_max,
                step_divisor: cfg.step_divisor,
                batch: cfg.batch,
                sign: cfg.sign_code(),
                batches_done: 0,
                next_modulus: cfg.x_min,
                output_len: writer.len,
                output_sha256: sha_hex(&writer.hasher),
                discs_done: 0,
                zeros_done: 0,
                complete: false,
            };
            write_checkpoint(&cfg.checkpoint, &ck)?;
            (writer, ck)
        }
    };

    // the plan is sized for the largest modulus in the window and shared
    // by every batch
    let parity = match cfg.sign {
        Sign::Negative => 1,
        Sign::Positive => 0,
    };
    let plan = Arc::new(build_plan(cfg.x_min + cfg.span - 1, cfg.digits, parity)?);
    let shared = Arc::new(SharedPowerTable::build(&plan));
    let scan = ScanConfig {
        t_max: cfg.t_max,
        step_divisor: cfg.step_divisor,
        refine_tolerance: 1e-12,
        center_check: true,
    };

    let remaining_span = cfg.x_min + cfg.span - ck.next_modulus;
    let discs = if remaining_span == 0 {
        Vec::new()
    } else {
        enumerate_range(&DiscriminantRange {
            x_min: ck.next_modulus,
            span: remaining_span,
            sign: cfg.sign,
        })?
    };
    let mut jobs: Vec<BatchJob> = Vec::new();
    for (i, chunk) in discs.chunks(cfg.batch).enumerate() {
        jobs.push(BatchJob { idx: ck.batches_done + i as u64, discs: chunk.to_vec() });
    }
    let total_batches = ck.batches_done + jobs.len() as u64;

    let (job_tx, job_rx) = mpsc::sync_channel::<BatchJob>(cfg.workers * 2);
    let job_rx = Arc::new(Mutex::new(job_rx));
    let (out_tx, out_rx) = mpsc::channel::<Result<BatchOut, CliError>>();

    std::thread::scope(|scope| -> Result<(), CliError> {
        for _ in 0..cfg.workers {
            let job_rx = Arc::clone(&job_rx);
            let out_tx = out_tx.clone();
            let plan = Arc::clone(&plan);
            let shared = Arc::clone(&shared);
            let scan = scan.clone();
            scope.spawn(move || loop {
                let job = match job_rx.lock().unwrap().recv() {
                    Ok(job) => job,
                    Err(_) => break,
                };
                let result = compute_batch(&plan, &shared, &scan, job);
                if out_tx.send(result).is_err() {
                    break;
                }
            });
        }
        drop(out_tx);

        let mut pending: BTreeMap<u64, BatchOut> = BTreeMap::new();
        let mut flushed = ck.batches_done;
        let flush_ready = |pending: &mut BTreeMap<u64, BatchOut>,
                               writer: &mut Writer,
                               ck: &mut Checkpoint,
                               flushed: &mut u64|
         -> Result<(), CliError> {
            while let Some(out) = pending.remove(flushed) {
                writer.append(out.lines.as_bytes())?;
                writer
                    .file
                    .flush()
                    .map_err(|e| CliError::io(format!("flush output: {e}")))?;
                ck.batches_done = *flushed + 1;
                ck.next_modulus = out.last_modulus + 1;
                ck.output_len = writer.len;
                ck.output_sha256 = sha_hex(&writer.hasher);
                ck.discs_done += out.discs;
                ck.zeros_done += out.zeros;
                write_checkpoint(&cfg.checkpoint, ck)?;
                eprintln!(
                    "batch {}/{}: discs={} zeros={} power_mults={} kernel_evals={}",
                    *flushed + 1,
                    total_batches,
                    out.discs,
                    out.zeros,
                    out.power_mults,
                    out.kernel_evals
                );
                *flushed += 1;
                if let Some(pause) = throttle {
                    std::thread::sleep(pause);
                }
            }
            Ok(())
        };

        let mut to_send = jobs.into_iter();
        let mut in_flight = 0u64;
        loop {
            // drain finished batches without blocking, then keep the queue
            // topped up; block on results once everything is queued
            while let Ok(result) = out_rx.try_recv() {
                let out = result?;
                pending.insert(out.idx, out);
                in_flight -= 1;
            }
            flush_ready(&mut pending, &mut writer, &mut ck, &mut flushed)?;
            match to_send.next() {
                Some(job) => {
                    in_flight += 1;
                    job_tx.send(job).expect("workers alive");
                }
                None => break,
            }
        }
        drop(job_tx);
        while in_flight > 0 {
            let out = out_rx.recv().expect("workers alive")?;
            pending.insert(out.idx, out);
            in_flight -= 1;
            flush_ready(&mut pending, &mut writer, &mut ck, &mut flushed)?;
        }
        Ok(())
    })?;

    writer.append(format!("# discs={} zeros={}\n", ck.discs_done, ck.zeros_done).as_bytes())?;
    writer
        .file
        .flush()
        .map_err(|e| CliError::io(format!("flush output: {e}")))?;
    ck.output_len = writer.len;
    ck.output_sha256 = sha_hex(&writer.hasher);
    ck.complete = true;
    write_checkpoint(&cfg.checkpoint, &ck)?;
    Ok(JobSummary { discs: ck.discs_done, zeros: ck.zeros_done, batches: ck.batches_done })
}
