//! CSV tables and SVG plots from an [`Experiment`].

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use carbonflow_core::encoding::{Genotype, JobId};
use carbonflow_core::model::{decode, offon_pays, Instance, Time};

use crate::experiment::{mean_table, results_csv, Experiment, Metric, RunRecord};

/// One operation in a Gantt chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GanttBar {
    pub factory: usize,
    pub machine: usize,
    pub job: JobId,
    pub start: Time,
    pub end: Time,
}

/// Idle time between two consecutive operations of one machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdleGap {
    pub factory: usize,
    pub machine: usize,
    pub start: Time,
    pub end: Time,
    /// Whether the machine is switched off for this gap.
    pub offon: bool,
}

/// Operation bars ordered by factory, sequence position and machine.
pub fn gantt_bars(instance: &Instance, genotype: &Genotype) -> Vec<GanttBar> {
    let schedule = decode(instance, genotype).expect("valid genotype");
    let mut bars = Vec::new();
    for (f, fs) in schedule.factories().iter().enumerate() {
        for (k, &job) in fs.jobs().iter().enumerate() {
            for j in 0..instance.num_machines() {
                bars.push(GanttBar {
                    factory: f,
                    machine: j,
                    job,
                    start: fs.start()[k][j],
                    end: fs.completion()[k][j],
                });
            }
        }
    }
    bars
}

pub fn idle_gaps(instance: &Instance, genotype: &Genotype, reduction: bool) -> Vec<IdleGap> {
    let schedule = decode(instance, genotype).expect("valid genotype");
    let c = instance.coefficients();
    let mut gaps = Vec::new();
    for (f, fs) in schedule.factories().iter().enumerate() {
        for j in 0..instance.num_machines() {
            for k in 1..fs.jobs().len() {
                let (start, end) = (fs.completion()[k - 1][j], fs.start()[k][j]);
                if end > start {
                    gaps.push(IdleGap {
                        factory: f,
                        machine: j,
                        start,
                        end,
                        offon: reduction && offon_pays(end - start, c),
                    });
                }
            }
        }
    }
    gaps
}

fn job_colour(job: JobId) -> String {
    format!("hsl({},55%,62%)", (job * 137) % 360)
}

const WIDTH: f64 = 960.0;
const LEFT: f64 = 70.0;
const ROW: f64 = 20.0;
const LANE_GAP: f64 = 14.0;

pub fn gantt_svg(instance: &Instance, genotype: &Genotype, reduction: bool) -> String {
    let bars = gantt_bars(instance, genotype);
    let gaps = idle_gaps(instance, genotype, reduction);
    let m = instance.num_machines();
    let horizon = bars.iter().map(|b| b.end).max().unwrap_or(1).max(1) as f64;
    let scale = (WIDTH - LEFT - 20.0) / horizon;
    let lane = m as f64 * ROW + LANE_GAP;
    let height = 30.0 + instance.num_factories() as f64 * lane + 20.0;
    let y = |f: usize, j: usize| 30.0 + f as f64 * lane + j as f64 * ROW;
    let x = |t: Time| LEFT + t as f64 * scale;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height:.0}" font-family="sans-serif" font-size="11">"##
    );
    let _ = writeln!(s, r##"<text x="{LEFT}" y="18">{} makespan {}</text>"##, instance.id(), horizon as u64);
    for f in 0..instance.num_factories() {
        for j in 0..m {
            let _ = writeln!(s, r##"<text x="4" y="{:.1}">F{} M{}</text>"##, y(f, j) + 14.0, f + 1, j + 1);
        }
    }
    for g in &gaps {
        let (class, fill) = if g.offon { ("offon", "#f7d4d4") } else { ("idle", "#e2e2e2") };
        let _ = writeln!(
            s,
            r##"<rect class="{class}" x="{:.2}" y="{:.1}" width="{:.2}" height="{:.1}" fill="{fill}"/>"##,
            x(g.start),
            y(g.factory, g.machine) + 2.0,
            (g.end - g.start) as f64 * scale,
            ROW - 4.0
        );
        if g.offon {
            let mid = (x(g.start) + x(g.end)) / 2.0;
            let _ = writeln!(
                s,
                r##"<text class="offon-mark" x="{mid:.2}" y="{:.1}" text-anchor="middle" fill="#b00">off</text>"##,
                y(g.factory, g.machine) + 14.0
            );
        }
    }
    for b in &bars {
        let _ = writeln!(
            s,
            r##"<rect class="op" x="{:.2}" y="{:.1}" width="{:.2}" height="{:.1}" fill="{}" stroke="#333" stroke-width="0.5"><title>job {} [{}, {})</title></rect>"##,
            x(b.start),
            y(b.factory, b.machine),
            (b.end - b.start) as f64 * scale,
            ROW - 1.0,
            job_colour(b.job),
            b.job + 1,
            b.start,
            b.end
        );
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{:.1}" text-anchor="middle">{}</text>"##,
            (x(b.start) + x(b.end)) / 2.0,
            y(b.factory, b.machine) + 14.0,
            b.job + 1
        );
    }
    s.push_str("</svg>\n");
    s
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Replicate 0 of every algorithm plus the reference front.
pub fn front_svg(exp: &Experiment, instance: &str) -> Option<String> {
    let reference = exp.reference_front(instance)?;
    let runs: Vec<&RunRecord> = exp
        .records_for(instance)
        .filter(|r| r.replicate == 0)
        .collect();
    let mut all: Vec<[f64; 2]> = reference.front.points().to_vec();
    for r in &runs {
        all.extend(r.points());
    }
    let (w, h, pad) = (640.0, 480.0, 60.0);
    let lo = |k: usize| all.iter().map(|p| p[k]).fold(f64::INFINITY, f64::min);
    let hi = |k: usize| all.iter().map(|p| p[k]).fold(f64::NEG_INFINITY, f64::max);
    let span = |k: usize| if hi(k) > lo(k) { hi(k) - lo(k) } else { 1.0 };
    let px = |p: &[f64; 2]| pad + (p[0] - lo(0)) / span(0) * (w - 2.0 * pad);
    let py = |p: &[f64; 2]| h - pad - (p[1] - lo(1)) / span(1) * (h - 2.0 * pad);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="11">"##
    );
    let _ = writeln!(s, r##"<text x="{pad}" y="20">{instance}</text>"##);
    let _ = writeln!(
        s,
        r##"<rect x="{pad}" y="{pad}" width="{}" height="{}" fill="none" stroke="#999"/>"##,
        w - 2.0 * pad,
        h - 2.0 * pad
    );
    let _ = writeln!(s, r##"<text x="{}" y="{}" text-anchor="middle">makespan</text>"##, w / 2.0, h - 20.0);
    let _ = writeln!(
        s,
        r##"<text x="16" y="{}" transform="rotate(-90 16 {})" text-anchor="middle">carbon emissions</text>"##,
        h / 2.0,
        h / 2.0
    );
    let _ = writeln!(s, r##"<text x="{pad}" y="{}">{:.0}</text>"##, h - pad + 14.0, lo(0));
    let _ = writeln!(s, r##"<text x="{}" y="{}" text-anchor="end">{:.0}</text>"##, w - pad, h - pad + 14.0, hi(0));
    let _ = writeln!(s, r##"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"##, pad - 4.0, h - pad, lo(1));
    let _ = writeln!(s, r##"<text x="{}" y="{}" text-anchor="end">{:.2}</text>"##, pad - 4.0, pad + 4.0, hi(1));
    for p in reference.front.points() {
        let _ = writeln!(
            s,
            r##"<rect class="reference" x="{:.2}" y="{:.2}" width="7" height="7" fill="none" stroke="#000"/>"##,
            px(p) - 3.5,
            py(p) - 3.5
        );
    }
    for (i, r) in runs.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        for p in r.points() {
            let _ = writeln!(
                s,
                r##"<circle class="point algo-{}" cx="{:.2}" cy="{:.2}" r="3" fill="{colour}" fill-opacity="0.75"/>"##,
                r.algorithm,
                px(&p),
                py(&p)
            );
        }
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{}" fill="{colour}">{}</text>"##,
            w - pad - 90.0,
            pad + 16.0 + 14.0 * i as f64,
            r.algorithm
        );
    }
    let _ = writeln!(s, r##"<text x="{}" y="{}">reference</text>"##, w - pad - 90.0, pad + 16.0 + 14.0 * runs.len() as f64);
    s.push_str("</svg>\n");
    Some(s)
}

/// `instance:replicate[:algorithm]` selector for a Gantt chart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GanttSpec {
    pub instance: String,
    pub replicate: u64,
    pub algorithm: Option<String>,
}

impl std::str::FromStr for GanttSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("expected instance:seed[:algorithm], got `{s}`");
        match parts.as_slice() {
            [inst, seed] | [inst, seed, _] if !inst.is_empty() => Ok(GanttSpec {
                instance: inst.to_string(),
                replicate: seed.parse().map_err(|_| bad())?,
                algorithm: parts.get(2).map(|a| a.to_string()),
            }),
            _ => Err(bad()),
        }
    }
}

/// Gantt chart of the lowest-makespan archive member of the selected run.
pub fn gantt_for(exp: &Experiment, spec: &GanttSpec) -> Result<String, String> {
    let instance = exp
        .instance(&spec.instance)
        .ok_or_else(|| format!("no instance `{}` in the records", spec.instance))?;
    let record = exp
        .records_for(&spec.instance)
        .find(|r| r.replicate == spec.replicate && spec.algorithm.as_ref().is_none_or(|a| &r.algorithm == a))
        .ok_or_else(|| format!("no run matches `{}:{}`", spec.instance, spec.replicate))?;
    let best = record
        .archive
        .first()
        .ok_or_else(|| format!("run {}:{} has an empty archive", spec.instance, spec.replicate))?;
    let genotype = Genotype::new(best.genotype.clone(), instance.num_jobs(), instance.num_factories())
        .map_err(|e| e.to_string())?;
    let reduction = exp
        .variants
        .iter()
        .find(|v| v.label == record.algorithm)
        .is_some_and(|v| v.config.reduction());
    Ok(gantt_svg(instance, &genotype, reduction))
}

fn file_safe(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' }).collect()
}

/// Write CSV tables and plots; returns the paths written.
pub fn write_report(exp: &Experiment, out: &Path, gantt: Option<&GanttSpec>) -> Result<Vec<PathBuf>, String> {
    let io = |p: &Path, e: std::io::Error| format!("{}: {e}", p.display());
    std::fs::create_dir_all(out).map_err(|e| io(out, e))?;
    let mut written = Vec::new();
    let mut put = |name: String, text: String| -> Result<(), String> {
        let path = out.join(name);
        if let Some(dir) = path.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
        }
        std::fs::write(&path, text).map_err(|e| io(&path, e))?;
        written.push(path);
        Ok(())
    };
    put("results.csv".into(), results_csv(exp))?;
    for metric in [Metric::Igd, Metric::Gd, Metric::Spread] {
        put(format!("{}_table.csv", metric.name()), mean_table(exp, metric))?;
    }
    for inst in &exp.instances {
        if let Some(svg) = front_svg(exp, inst.id()) {
            put(format!("fronts/{}.svg", file_safe(inst.id())), svg)?;
        }
    }
    if let Some(spec) = gantt {
        let svg = gantt_for(exp, spec)?;
        let algo = spec.algorithm.as_deref().unwrap_or("any");
        put(
            format!("gantt_{}_{}_{}.svg", file_safe(&spec.instance), spec.replicate, file_safe(algo)),
            svg,
        )?;
    }
    Ok(written)
}
