//! Reader and writer for the `baseMVA`/`bus`/`gen`/`branch` subset of the
//! MATPOWER case format. Tables must already be in MW/MVAr and p.u.; files
//! that rescale their tables with trailing MATLAB statements are rejected.

use super::{Branch, Bus, BusKind, LoadPoint, Network};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::fmt::Write as _;

const BUS_I: usize = 0;
const BUS_TYPE: usize = 1;
const PD: usize = 2;
const QD: usize = 3;
const GS: usize = 4;
const BS: usize = 5;
const BASE_KV: usize = 9;
const BUS_COLS: usize = 13;

const F_BUS: usize = 0;
const T_BUS: usize = 1;
const BR_R: usize = 2;
const BR_X: usize = 3;
const BR_B: usize = 4;
const TAP: usize = 8;
const SHIFT: usize = 9;
const BR_STATUS: usize = 10;
const BRANCH_COLS: usize = 11;

struct Table {
    line: usize,
    rows: Vec<(usize, Vec<f64>)>,
}

fn strip_comment(line: &str) -> &str {
    let mut in_quote = false;
    for (i, c) in line.char_indices() {
        match c {
            '\'' => in_quote = !in_quote,
            '%' if !in_quote => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_number(tok: &str, line: usize) -> Result<f64> {
    match tok {
        "Inf" | "inf" => Ok(f64::INFINITY),
        "-Inf" | "-inf" => Ok(f64::NEG_INFINITY),
        _ => tok.parse::<f64>().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid number '{tok}'"),
        }),
    }
}

/// Splits the text into `mpc.<name> = [...]` tables and scalar assignments.
fn scan(text: &str) -> Result<(HashMap<String, f64>, HashMap<String, Table>)> {
    let mut scalars = HashMap::new();
    let mut tables: HashMap<String, Table> = HashMap::new();
    // (table name, rows, current row tokens, row start line)
    let mut open: Option<(String, Table, Vec<f64>, usize)> = None;
    let mut in_cell = false;

    for (ln0, raw) in text.lines().enumerate() {
        let ln = ln0 + 1;
        let mut rest = strip_comment(raw).trim();

        if in_cell {
            if rest.contains('}') {
                in_cell = false;
            }
            continue;
        }

        if open.is_none() {
            if rest.is_empty() || rest.starts_with("function") {
                continue;
            }
            let Some(stmt) = rest.strip_prefix("mpc.") else {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("unsupported statement '{rest}'"),
                });
            };
            let name_end = stmt
                .find(|c: char| !(c.is_alphanumeric() || c == '_'))
                .unwrap_or(stmt.len());
            let name = &stmt[..name_end];
            let after = stmt[name_end..].trim_start();
            let Some(value) = after.strip_prefix('=') else {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("unsupported statement on mpc.{name}; tables must be plain literals"),
                });
            };
            let value = value.trim();
            if let Some(body) = value.strip_prefix('[') {
                open = Some((name.to_string(), Table { line: ln, rows: Vec::new() }, Vec::new(), ln));
                rest = body;
            } else if value.starts_with('{') {
                in_cell = !value.contains('}');
                continue;
            } else {
                let v = value.trim_end_matches(';').trim();
                if v.starts_with('\'') {
                    continue;
                }
                scalars.insert(name.to_string(), parse_number(v, ln)?);
                continue;
            }
        }

        let (name, mut table, mut row, mut row_line) = open.take().expect("table is open");
        if row.is_empty() {
            row_line = ln;
        }
        let mut closed = false;
        let mut tok = String::new();
        let flush = |tok: &mut String, row: &mut Vec<f64>| -> Result<()> {
            if !tok.is_empty() {
                row.push(parse_number(tok, ln)?);
                tok.clear();
            }
            Ok(())
        };
        for c in rest.chars() {
            match c {
                ']' => {
                    flush(&mut tok, &mut row)?;
                    closed = true;
                    break;
                }
                ';' => {
                    flush(&mut tok, &mut row)?;
                    if !row.is_empty() {
                        table.rows.push((row_line, std::mem::take(&mut row)));
                    }
                    row_line = ln;
                }
                ',' | ' ' | '\t' => flush(&mut tok, &mut row)?,
                _ => tok.push(c),
            }
        }
        flush(&mut tok, &mut row)?;
        // a newline also terminates a row
        if !row.is_empty() {
            table.rows.push((row_line, std::mem::take(&mut row)));
        }
        if closed {
            tables.insert(name, table);
        } else {
            open = Some((name, table, row, row_line));
        }
    }
    if let Some((name, table, _, _)) = open {
        return Err(Error::Parse {
            line: table.line,
            msg: format!("table mpc.{name} is never closed"),
        });
    }
    Ok((scalars, tables))
}

/// Reads and parses a case file.
pub fn read_matpower(path: impl AsRef<std::path::Path>) -> Result<Network> {
    parse_matpower(&std::fs::read_to_string(path)?)
}

/// Parses MATPOWER case text into a per-unit [`Network`]. Bus loads become
/// [`LoadPoint`]s; out-of-service branches are dropped; the generator table
/// is ignored.
pub fn parse_matpower(text: &str) -> Result<Network> {
    let (scalars, tables) = scan(text)?;
    let base_mva = *scalars.get("baseMVA").ok_or(Error::Parse {
        line: 0,
        msg: "missing mpc.baseMVA".into(),
    })?;
    if !(base_mva > 0.0) {
        return Err(Error::Parse { line: 0, msg: "baseMVA must be positive".into() });
    }
    let bus_t = tables.get("bus").ok_or(Error::Parse { line: 0, msg: "missing mpc.bus".into() })?;
    let branch_t = tables
        .get("branch")
        .ok_or(Error::Parse { line: 0, msg: "missing mpc.branch".into() })?;

    let mut buses = Vec::with_capacity(bus_t.rows.len());
    let mut loads = Vec::new();
    let mut index_of = HashMap::new();
    for (line, row) in &bus_t.rows {
        if row.len() < BUS_COLS {
            return Err(Error::Parse {
                line: *line,
                msg: format!("bus row has {} columns, expected {BUS_COLS}", row.len()),
            });
        }
        let id = row[BUS_I];
        if id < 1.0 || id.fract() != 0.0 {
            return Err(Error::Parse { line: *line, msg: format!("invalid bus number {id}") });
        }
        let id = id as usize;
        let kind = match row[BUS_TYPE] as i64 {
            3 => BusKind::Slack,
            // voltage-controlled buses are treated as PQ; PV injection comes from the scenario
            1 | 2 => BusKind::Pq,
            t => {
                return Err(Error::Parse { line: *line, msg: format!("unsupported bus type {t}") });
            }
        };
        let index = buses.len();
        if index_of.insert(id, index).is_some() {
            return Err(Error::Parse { line: *line, msg: format!("duplicate bus number {id}") });
        }
        buses.push(Bus {
            index,
            id,
            kind,
            base_kv: row[BASE_KV],
            gs: row[GS] / base_mva,
            bs: row[BS] / base_mva,
        });
        if row[PD] != 0.0 || row[QD] != 0.0 {
            loads.push(LoadPoint { bus: index, p_nom: row[PD] / base_mva, q_nom: row[QD] / base_mva });
        }
    }

    let mut branches = Vec::with_capacity(branch_t.rows.len());
    for (line, row) in &branch_t.rows {
        if row.len() < BRANCH_COLS {
            return Err(Error::Parse {
                line: *line,
                msg: format!("branch row has {} columns, expected at least {BRANCH_COLS}", row.len()),
            });
        }
        if row[BR_STATUS] == 0.0 {
            continue;
        }
        if (row[TAP] != 0.0 && row[TAP] != 1.0) || row[SHIFT] != 0.0 {
            return Err(Error::Parse {
                line: *line,
                msg: "off-nominal transformer ratios are not supported".into(),
            });
        }
        let lookup = |v: f64| {
            index_of.get(&(v as usize)).copied().ok_or(Error::Parse {
                line: *line,
                msg: format!("branch references unknown bus {v}"),
            })
        };
        branches.push(Branch {
            from: lookup(row[F_BUS])?,
            to: lookup(row[T_BUS])?,
            r: row[BR_R],
            x: row[BR_X],
            b_shunt: row[BR_B],
        });
    }

    let name = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("function"))
        .and_then(|l| l.split('=').nth(1))
        .map(|n| n.trim().to_string())
        .unwrap_or_default();
    Network::new(name, base_mva, buses, branches, loads, vec![])
}

fn num(x: f64) -> String {
    // Display prints the shortest representation that round-trips
    format!("{x}")
}

/// Writes the case part of a network (PV plants are scenario data and are
/// not part of the case format).
pub fn write_matpower(net: &Network) -> String {
    let mut out = String::new();
    let fname = if net.name.is_empty() { "case" } else { net.name.as_str() };
    let (pd, qd) = net.nominal_bus_loads();
    let b = net.base_mva;
    let _ = writeln!(out, "function mpc = {}", fname.replace(|c: char| !c.is_alphanumeric(), "_"));
    let _ = writeln!(out, "mpc.version = '2';");
    let _ = writeln!(out, "mpc.baseMVA = {};", num(b));
    let _ = writeln!(out, "%\tbus_i\ttype\tPd\tQd\tGs\tBs\tarea\tVm\tVa\tbaseKV\tzone\tVmax\tVmin");
    let _ = writeln!(out, "mpc.bus = [");
    for bus in &net.buses {
        let ty = match bus.kind {
            BusKind::Slack => 3,
            BusKind::Pq => 1,
        };
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t1\t1\t0\t{}\t1\t1.1\t0.9;",
            bus.id,
            ty,
            num(pd[bus.index] * b),
            num(qd[bus.index] * b),
            num(bus.gs * b),
            num(bus.bs * b),
            num(bus.base_kv)
        );
    }
    let _ = writeln!(out, "];");
    let _ = writeln!(out, "mpc.gen = [");
    let _ = writeln!(out, "\t{}\t0\t0\t10\t-10\t1\t100\t1\t10\t0;", net.buses[net.slack_bus].id);
    let _ = writeln!(out, "];");
    let _ = writeln!(out, "%\tfbus\ttbus\tr\tx\tb\trateA\trateB\trateC\tratio\tangle\tstatus\tangmin\tangmax");
    let _ = writeln!(out, "mpc.branch = [");
    for br in &net.branches {
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t0\t0\t0\t0\t0\t1\t-360\t360;",
            net.buses[br.from].id,
            net.buses[br.to].id,
            num(br.r),
            num(br.x),
            num(br.b_shunt)
        );
    }
    let _ = writeln!(out, "];");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = "function mpc = tiny
mpc.version = '2';
mpc.baseMVA = 1;
mpc.bus = [
  1 3 0 0 0 0 1 1 0 12.66 1 1.1 0.9;
  2 1 0.5 0.1 0 0 1 1 0 12.66 1 1.1 0.9;
];
mpc.gen = [ 1 0 0 10 -10 1 100 1 10 0 ];
mpc.branch = [
  1 2 0.01 0.02 0 0 0 0 0 0 1 -360 360;
];
";

    #[test]
    fn minimal_two_bus() {
        let net = parse_matpower(TWO_BUS).unwrap();
        assert_eq!(net.n_buses(), 2);
        assert_eq!(net.branches.len(), 1);
        assert_eq!(net.slack_bus, 0);
        assert_eq!(net.loads.len(), 1);
        assert_eq!(net.loads[0].p_nom, 0.5);
    }

    #[test]
    fn malformed_number_names_line() {
        let bad = TWO_BUS.replace("0.01 0.02", "0.01 zz");
        match parse_matpower(&bad) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_slack_is_validation_error() {
        let bad = TWO_BUS.replace("1 3 0 0", "1 1 0 0");
        assert!(matches!(parse_matpower(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn two_slacks_is_validation_error() {
        let bad = TWO_BUS.replace("2 1 0.5", "2 3 0.5");
        assert!(matches!(parse_matpower(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn disconnected_is_validation_error() {
        let bad = TWO_BUS.replace("0 0 1 -360 360;", "0 0 0 -360 360;");
        assert!(matches!(parse_matpower(&bad), Err(Error::Validation(_))));
    }

    #[test]
    fn short_row_rejected() {
        let bad = TWO_BUS.replace("1 2 0.01 0.02 0 0 0 0 0 0 1 -360 360;", "1 2 0.01;");
        assert!(matches!(parse_matpower(&bad), Err(Error::Parse { line: 10, .. })));
    }

    #[test]
    fn conversion_statements_rejected() {
        let bad = format!("{TWO_BUS}mpc.bus(:, [3 4]) = mpc.bus(:, [3 4]) / 1e3;\n");
        assert!(matches!(parse_matpower(&bad), Err(Error::Parse { line: 12, .. })));
    }

    #[test]
    fn write_then_parse_preserves_structure() {
        let net = parse_matpower(TWO_BUS).unwrap();
        let again = parse_matpower(&write_matpower(&net)).unwrap();
        assert_eq!(net.buses, again.buses);
        assert_eq!(net.branches, again.branches);
        assert_eq!(net.loads, again.loads);
    }
}
