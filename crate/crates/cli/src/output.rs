//! CSV and JSON writers. Floats are written in Rust's shortest
//! round-trip form, so every value reads back to the same bits.

use std::io::{self, Write};

use serde::Serialize;
use switchlayer::integrate::{Event, Sample, Trajectory};

use crate::config::fmt_f64;

/// Keeps every `stride`-th sample plus the last one.
pub fn decimate(traj: &Trajectory, stride: usize) -> Vec<&Sample> {
    let stride = stride.max(1);
    let n = traj.samples.len();
    traj.samples.iter().enumerate().filter(|(i, _)| i % stride == 0 || i + 1 == n).map(|(_, s)| s).collect()
}

pub fn trajectory_header(dim: usize) -> String {
    let mut h = String::from("t");
    for i in 1..=dim {
        h.push_str(&format!(",x{i}"));
    }
    h.push_str(",lambda,mode");
    h
}

pub fn write_trajectory_csv<W: Write>(w: &mut W, dim: usize, samples: &[&Sample]) -> io::Result<()> {
    writeln!(w, "{}", trajectory_header(dim))?;
    for s in samples {
        write!(w, "{}", fmt_f64(s.t))?;
        for v in &s.x {
            write!(w, ",{}", fmt_f64(*v))?;
        }
        writeln!(w, ",{},{}", fmt_f64(s.lam), s.mode.label())?;
    }
    Ok(())
}

pub fn write_events_csv<W: Write>(w: &mut W, events: &[Event]) -> io::Result<()> {
    writeln!(w, "t,kind")?;
    for e in events {
        writeln!(w, "{},{}", fmt_f64(e.t), e.kind.label())?;
    }
    Ok(())
}

#[derive(Serialize)]
pub struct Meta {
    pub engine: &'static str,
    pub source: String,
    pub version: &'static str,
    pub t_span: (f64, f64),
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigmoid: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub event_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub stride: usize,
}

#[derive(Serialize)]
struct JsonSample<'a> {
    t: f64,
    x: &'a [f64],
    lambda: f64,
    mode: &'static str,
}

#[derive(Serialize)]
struct JsonEvent {
    t: f64,
    kind: &'static str,
}

#[derive(Serialize)]
struct JsonRun<'a> {
    meta: &'a Meta,
    columns: Vec<String>,
    samples: Vec<JsonSample<'a>>,
    events: Vec<JsonEvent>,
}

pub fn write_trajectory_json<W: Write>(
    w: &mut W,
    meta: &Meta,
    dim: usize,
    samples: &[&Sample],
    events: &[Event],
) -> io::Result<()> {
    let run = JsonRun {
        meta,
        columns: trajectory_header(dim).split(',').map(String::from).collect(),
        samples: samples.iter().map(|s| JsonSample { t: s.t, x: &s.x, lambda: s.lam, mode: s.mode.label() }).collect(),
        events: events.iter().map(|e| JsonEvent { t: e.t, kind: e.kind.label() }).collect(),
    };
    serde_json::to_writer_pretty(&mut *w, &run)?;
    writeln!(w)
}
