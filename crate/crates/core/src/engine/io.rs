//! Columnar snapshot files: one row per `(t, agent)`, header
//! `t,agent,opinion,silent` with an optional leading `run_id` column.
//! `silent` is 1 for a silent agent. Opinions are written in the shortest
//! decimal form that parses back to the same binary64 value.

use std::io::{self, Read, Write};

use serde::Deserialize;

use crate::dynamics::{public_update, ModelConfig, OpinionState, SilenceState, SimState, Variant};

pub trait SnapshotSink {
    fn write_state(&mut self, state: &SimState) -> io::Result<()>;
    fn flush(&mut self) -> io::Result<()>;
}

pub struct CsvSnapshotWriter<W: Write> {
    out: csv::Writer<W>,
    run_id: Option<String>,
}

impl<W: Write> CsvSnapshotWriter<W> {
    pub fn new(out: W, run_id: Option<String>) -> io::Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        let mut header = Vec::with_capacity(5);
        if run_id.is_some() {
            header.push("run_id");
        }
        header.extend(["t", "agent", "opinion", "silent"]);
        out.write_record(&header)?;
        Ok(CsvSnapshotWriter { out, run_id })
    }

    pub fn into_inner(self) -> io::Result<W> {
        self.out.into_inner().map_err(|e| e.into_error())
    }
}

impl<W: Write> SnapshotSink for CsvSnapshotWriter<W> {
    fn write_state(&mut self, state: &SimState) -> io::Result<()> {
        let t = state.t.to_string();
        for (i, (&b, &speaks)) in state.opinions.iter().zip(state.silence.iter()).enumerate() {
            let agent = i.to_string();
            let opinion = b.to_string();
            let silent = if speaks { "0" } else { "1" };
            match &self.run_id {
                Some(id) => self.out.write_record([id.as_str(), &t, &agent, &opinion, silent])?,
                None => self.out.write_record([t.as_str(), &agent, &opinion, silent])?,
            }
        }
        Ok(())
    }

    fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct TrajectoryRow {
    #[serde(default)]
    pub run_id: Option<String>,
    pub t: u64,
    pub agent: usize,
    pub opinion: f64,
    pub silent: u8,
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

/// Reads a snapshot file back into states. Public opinions of the
/// memory-based model are rebuilt from the rows, which requires every step
/// from `t = 0` on.
pub fn read_trajectory<R: Read>(input: R, config: &ModelConfig) -> io::Result<Vec<SimState>> {
    let mut reader = csv::Reader::from_reader(input);
    let mut states: Vec<SimState> = Vec::new();
    let mut t_cur: Option<u64> = None;
    let mut opinions = Vec::new();
    let mut speaking = Vec::new();

    let close = |t: u64, opinions: Vec<f64>, speaking: Vec<bool>, states: &mut Vec<SimState>| {
        let opinions = OpinionState::new(opinions).map_err(|e| invalid(format!("t={t}: {e}")))?;
        let silence = SilenceState::new(speaking);
        let public = match (config.variant, states.last()) {
            (Variant::SomPlus, None) => Some(crate::dynamics::PublicOpinionState::initial(&opinions)),
            (Variant::SomPlus, Some(prev)) => {
                if prev.t + 1 != t {
                    return Err(invalid(format!("memory-based replay needs every step, t={t} follows t={}", prev.t)));
                }
                let p = prev.public.as_ref().expect("built above");
                Some(public_update(&opinions, &silence, p, t))
            }
            _ => None,
        };
        states.push(SimState { t, opinions, silence, public });
        Ok(())
    };

    for row in reader.deserialize::<TrajectoryRow>() {
        let row = row.map_err(|e| invalid(e.to_string()))?;
        if t_cur != Some(row.t) {
            if let Some(t) = t_cur {
                if row.t <= t {
                    return Err(invalid(format!("time {} does not increase after {t}", row.t)));
                }
                close(t, std::mem::take(&mut opinions), std::mem::take(&mut speaking), &mut states)?;
            }
            t_cur = Some(row.t);
        }
        if row.agent != opinions.len() {
            return Err(invalid(format!("t={}: expected agent {}, got {}", row.t, opinions.len(), row.agent)));
        }
        let speaks = match row.silent {
            0 => true,
            1 => false,
            other => return Err(invalid(format!("silent flag must be 0 or 1, got {other}"))),
        };
        opinions.push(row.opinion);
        speaking.push(speaks);
    }
    if let Some(t) = t_cur {
        close(t, opinions, speaking, &mut states)?;
    }
    if let Some(bad) = states.iter().find(|s| s.n() != config.n()) {
        return Err(invalid(format!("t={} has {} agents, config has {}", bad.t, bad.n(), config.n())));
    }
    Ok(states)
}
