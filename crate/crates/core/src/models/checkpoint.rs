//! Plain-text parameter checkpoints.
//!
//! ```text
//! ctransfer-checkpoint 1
//! model gru
//! input 10
//! hidden 32
//! block update_input 32 10
//! <one line per row, space separated>
//! ...
//! end
//! ```

use std::io::{BufRead, Write};

use super::{Classifier, GruModel, LogisticRegression, ModelKind};
use crate::{Error, Result};

const MAGIC: &str = "ctransfer-checkpoint";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum Checkpoint {
    Lr(LogisticRegression),
    Gru(GruModel),
}

impl Checkpoint {
    pub fn kind(&self) -> ModelKind {
        match self {
            Checkpoint::Lr(_) => ModelKind::Lr,
            Checkpoint::Gru(_) => ModelKind::Gru,
        }
    }

    pub fn predict(&self, history: &[f64]) -> Result<f64> {
        match self {
            Checkpoint::Lr(m) => m.predict(history),
            Checkpoint::Gru(m) => m.predict(history),
        }
    }
}

fn write_blocks<M: Classifier, W: Write>(model: &M, out: &mut W) -> Result<()> {
    let p = model.params();
    for (name, rows, cols, offset) in model.layout() {
        writeln!(out, "block {name} {rows} {cols}")?;
        for r in 0..rows {
            let row: Vec<String> = p[offset + r * cols..offset + (r + 1) * cols]
                .iter()
                .map(|v| format!("{v:?}"))
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
    }
    Ok(())
}

pub fn write_checkpoint<W: Write>(checkpoint: &Checkpoint, mut out: W) -> Result<()> {
    writeln!(out, "{MAGIC} {VERSION}")?;
    writeln!(out, "model {}", checkpoint.kind().as_str())?;
    match checkpoint {
        Checkpoint::Lr(m) => {
            writeln!(out, "input {}", m.n_inputs())?;
            writeln!(out, "hidden 0")?;
            write_blocks(m, &mut out)?;
        }
        Checkpoint::Gru(m) => {
            writeln!(out, "input {}", m.input_size())?;
            writeln!(out, "hidden {}", m.hidden_size())?;
            write_blocks(m, &mut out)?;
        }
    }
    writeln!(out, "end")?;
    Ok(())
}

fn bad(msg: impl Into<String>) -> Error {
    Error::Parse(format!("checkpoint: {}", msg.into()))
}

struct Lines<R> {
    inner: std::io::Lines<R>,
}

impl<R: BufRead> Lines<R> {
    fn next_line(&mut self) -> Result<String> {
        match self.inner.next() {
            Some(line) => Ok(line?),
            None => Err(bad("unexpected end of input")),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<String> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((k, v)) if k == key => Ok(v.trim().to_string()),
            _ => Err(bad(format!("expected `{key}`, found `{line}`"))),
        }
    }
}

fn read_blocks<M: Classifier, R: BufRead>(model: &mut M, lines: &mut Lines<R>) -> Result<()> {
    for (name, rows, cols, offset) in model.layout() {
        let header = lines.keyed("block")?;
        let expected = format!("{name} {rows} {cols}");
        if header != expected {
            return Err(bad(format!("expected block `{expected}`, found `{header}`")));
        }
        for r in 0..rows {
            let line = lines.next_line()?;
            let values = line
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| bad(format!("bad number `{t}`"))))
                .collect::<Result<Vec<f64>>>()?;
            if values.len() != cols {
                return Err(Error::ShapeMismatch {
                    expected: cols,
                    actual: values.len(),
                });
            }
            if values.iter().any(|v| !v.is_finite()) {
                return Err(bad(format!("non-finite value in block `{name}`")));
            }
            let start = offset + r * cols;
            model.params_mut()[start..start + cols].copy_from_slice(&values);
        }
    }
    if lines.next_line()?.trim() != "end" {
        return Err(bad("missing `end`"));
    }
    Ok(())
}

pub fn read_checkpoint<R: BufRead>(input: R) -> Result<Checkpoint> {
    let mut lines = Lines { inner: input.lines() };
    let version = lines.keyed(MAGIC)?;
    if version != VERSION.to_string() {
        return Err(bad(format!("unsupported version {version}")));
    }
    let kind = lines.keyed("model")?;
    let parse_usize = |s: String| s.parse::<usize>().map_err(|_| bad(format!("bad size `{s}`")));
    let input = parse_usize(lines.keyed("input")?)?;
    let hidden = parse_usize(lines.keyed("hidden")?)?;
    match kind.as_str() {
        "lr" => {
            let mut m = LogisticRegression::zeros(input);
            read_blocks(&mut m, &mut lines)?;
            Ok(Checkpoint::Lr(m))
        }
        "gru" => {
            let mut m = GruModel::zeros(input, hidden);
            read_blocks(&mut m, &mut lines)?;
            Ok(Checkpoint::Gru(m))
        }
        other => Err(bad(format!("unknown model `{other}`"))),
    }
}
