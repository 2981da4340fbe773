//! Text scenario files.
//!
//! ```text
//! o2onc-scenario v1
//! # two receivers holding each other's missing packet
//! receivers = 2
//! packets = 2
//! epsilons = 0.1, 0.2
//! seed = 7
//! has
//! 10
//! 01
//! ```
//!
//! `epsilons` takes either one value per receiver or a single value shared
//! by all. `seed` is optional and defaults to 0. The `has` block has one row
//! per receiver and one `0`/`1` column per packet. Blank lines and `#`
//! comments are ignored everywhere.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::packet_set::{PacketSet, MAX_PACKETS};
use crate::sim::Scenario;

pub const HEADER: &str = "o2onc-scenario v1";

fn invalid(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidScenario(format!("line {line}: {msg}"))
}

pub fn parse(text: &str) -> Result<Scenario> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    match lines.next() {
        Some((_, HEADER)) => {}
        Some((n, other)) => {
            return Err(invalid(n, format!("expected '{HEADER}', found '{other}'")))
        }
        None => return Err(Error::InvalidScenario("empty file".into())),
    }

    let mut receivers = None;
    let mut packets = None;
    let mut epsilons: Option<Vec<f64>> = None;
    let mut seed = 0u64;
    let mut rows = Vec::new();
    let mut in_has = false;

    for (n, line) in lines {
        if in_has {
            let mut row = PacketSet::new();
            for (j, c) in line.chars().enumerate() {
                match c {
                    '1' if j < MAX_PACKETS => {
                        row.insert(j);
                    }
                    '1' => return Err(invalid(n, format!("more than {MAX_PACKETS} packets"))),
                    '0' => {}
                    _ => return Err(invalid(n, format!("unexpected '{c}' in has row"))),
                }
            }
            rows.push((n, line.chars().count(), row));
            continue;
        }
        if line == "has" {
            in_has = true;
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| invalid(n, format!("expected 'key = value', found '{line}'")))?;
        match key {
            "receivers" => receivers = Some(value.parse::<usize>().map_err(|e| invalid(n, e))?),
            "packets" => packets = Some(value.parse::<usize>().map_err(|e| invalid(n, e))?),
            "seed" => seed = value.parse().map_err(|e| invalid(n, e))?,
            "epsilons" => {
                epsilons = Some(
                    value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>().map_err(|e| invalid(n, e)))
                        .collect::<Result<_>>()?,
                )
            }
            _ => return Err(invalid(n, format!("unknown key '{key}'"))),
        }
    }

    let missing = |k: &str| Error::InvalidScenario(format!("missing '{k}'"));
    let receivers = receivers.ok_or_else(|| missing("receivers"))?;
    let packets = packets.ok_or_else(|| missing("packets"))?;
    let mut epsilons = epsilons.ok_or_else(|| missing("epsilons"))?;
    if !in_has {
        return Err(missing("has"));
    }
    if epsilons.len() == 1 {
        epsilons = vec![epsilons[0]; receivers];
    }
    if rows.len() != receivers {
        return Err(Error::InvalidScenario(format!(
            "{} has rows for {receivers} receivers",
            rows.len()
        )));
    }
    if let Some((n, width, _)) = rows.iter().find(|(_, w, _)| *w != packets) {
        return Err(invalid(
            *n,
            format!("has row has {width} columns, expected {packets}"),
        ));
    }
    let scenario = Scenario {
        receivers,
        packets,
        epsilons,
        initial_has: rows.into_iter().map(|(_, _, r)| r).collect(),
        seed,
    };
    scenario.validate()?;
    Ok(scenario)
}

pub fn load(path: &Path) -> std::io::Result<Result<Scenario>> {
    std::fs::read_to_string(path).map(|t| parse(&t))
}

pub fn render(s: &Scenario) -> String {
    let mut out = format!(
        "{HEADER}\nreceivers = {}\npackets = {}\nepsilons = ",
        s.receivers, s.packets
    );
    let eps: Vec<String> = s.epsilons.iter().map(f64::to_string).collect();
    out.push_str(&eps.join(", "));
    let _ = write!(out, "\nseed = {}\nhas\n", s.seed);
    for h in &s.initial_has {
        out.extend((0..s.packets).map(|j| if h.contains(j) { '1' } else { '0' }));
        out.push('\n');
    }
    out
}
