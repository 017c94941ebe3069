//! FCIDUMP reader.
//!
//! The format is a Fortran namelist header followed by integral lines
//! `value i j k l` with 1-based indices: `i=j=k=l=0` carries the core
//! energy, `k=l=0` a one-body element, anything else a two-body element in
//! chemists' (ij|kl) convention. Missing permutational images are filled
//! in; conflicting duplicates are rejected.

use std::collections::HashMap;
use std::path::Path;

use nalgebra::DMatrix;

use crate::fermion::{eightfold, IntegralSet};
use crate::{Error, Result};

#[derive(Debug, Default)]
struct Header {
    norb: Option<usize>,
    nelec: Option<usize>,
    ms2: Option<i64>,
}

fn parse_error(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// Splits the namelist body into KEY=VALUE fragments, tolerating commas,
/// arbitrary whitespace and multi-valued entries such as ORBSYM=1,1,1,1.
fn parse_header(body: &str, line: usize) -> Result<Header> {
    let mut header = Header::default();
    let cleaned = body.replace(['\n', '\r'], " ");
    for fragment in cleaned.split('=').collect::<Vec<_>>().windows(2) {
        let key = fragment[0]
            .rsplit([' ', ','])
            .find(|s| !s.is_empty())
            .unwrap_or("");
        let value_str = fragment[1].trim();
        let first_value = value_str
            .split([',', ' '])
            .find(|s| !s.is_empty())
            .unwrap_or("");
        match key.to_ascii_uppercase().as_str() {
            "NORB" => {
                header.norb = Some(first_value.parse().map_err(|_| {
                    parse_error(line, format!("bad NORB value '{first_value}'"))
                })?)
            }
            "NELEC" => {
                header.nelec = Some(first_value.parse().map_err(|_| {
                    parse_error(line, format!("bad NELEC value '{first_value}'"))
                })?)
            }
            "MS2" => {
                header.ms2 = Some(first_value.parse().map_err(|_| {
                    parse_error(line, format!("bad MS2 value '{first_value}'"))
                })?)
            }
            // ORBSYM, ISYM and vendor extensions are accepted and ignored.
            _ => {}
        }
    }
    Ok(header)
}

/// Parses FCIDUMP text into an [`IntegralSet`]. Parse failures carry the
/// 1-based offending line number.
pub fn parse_fcidump(text: &str) -> Result<IntegralSet> {
    let mut lines = text.lines().enumerate();

    // header: everything from &FCI (or &NAMELIST) through &END or /
    let mut header_body = String::new();
    let mut header_done = false;
    let mut first_data_line = 0;
    for (idx, raw) in lines.by_ref() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if header_body.is_empty() && !line.starts_with('&') && !line.starts_with('$') {
            return Err(parse_error(line_no, "expected namelist header starting with '&'"));
        }
        let upper = line.to_ascii_uppercase();
        let end = ["&END", "$END", "/"]
            .iter()
            .filter_map(|tok| upper.find(tok).map(|pos| (pos, tok.len())))
            .min();
        if let Some((pos, tok_len)) = end {
            header_body.push_str(&line[..pos]);
            let rest = line[pos + tok_len..].trim();
            if !rest.is_empty() {
                return Err(parse_error(
                    line_no,
                    "unexpected content after namelist terminator",
                ));
            }
            header_done = true;
            first_data_line = line_no;
            break;
        }
        header_body.push_str(line);
        header_body.push(' ');
    }
    if !header_done {
        return Err(parse_error(1, "namelist header never terminated with &END or /"));
    }
    let header = parse_header(&header_body, first_data_line)?;
    let norb = header
        .norb
        .ok_or_else(|| parse_error(first_data_line, "header is missing NORB"))?;
    if norb == 0 || norb > 32 {
        return Err(parse_error(
            first_data_line,
            format!("NORB = {norb} out of supported range"),
        ));
    }
    let nelec = header
        .nelec
        .ok_or_else(|| parse_error(first_data_line, "header is missing NELEC"))?;
    let ms2 = header.ms2.unwrap_or(0);

    let mut core_energy = 0.0f64;
    let mut one_body = DMatrix::zeros(norb, norb);
    let mut one_seen: HashMap<(usize, usize), f64> = HashMap::new();
    let mut two_body = vec![0.0f64; norb.pow(4)];
    let mut two_seen: HashMap<(usize, usize, usize, usize), f64> = HashMap::new();
    let flat = |i: usize, j: usize, k: usize, l: usize| ((i * norb + j) * norb + k) * norb + l;

    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(parse_error(
                line_no,
                format!("expected 'value i j k l', found {} fields", fields.len()),
            ));
        }
        let value: f64 = fields[0]
            .replace(['D', 'd'], "E")
            .parse()
            .map_err(|_| parse_error(line_no, format!("bad value '{}'", fields[0])))?;
        let mut ix = [0usize; 4];
        for (slot, f) in ix.iter_mut().zip(&fields[1..]) {
            *slot = f
                .parse()
                .map_err(|_| parse_error(line_no, format!("bad index '{f}'")))?;
        }
        let [i, j, k, l] = ix;
        for idx1 in ix {
            if idx1 > norb {
                return Err(parse_error(
                    line_no,
                    format!("index {idx1} exceeds NORB = {norb}"),
                ));
            }
        }
        match (i, j, k, l) {
            (0, 0, 0, 0) => core_energy = value,
            (i, 0, 0, 0) if i > 0 => {
                // orbital-energy line; carried by some producers, ignored
            }
            (i, j, 0, 0) if i > 0 && j > 0 => {
                let (a, b) = (i - 1, j - 1);
                for key in [(a, b), (b, a)] {
                    if let Some(prev) = one_seen.insert(key, value) {
                        if (prev - value).abs() > 1e-10 {
                            return Err(parse_error(
                                line_no,
                                format!("one-body element ({i},{j}) conflicts with an earlier value"),
                            ));
                        }
                    }
                }
                one_body[(a, b)] = value;
                one_body[(b, a)] = value;
            }
            (i, j, k, l) if i > 0 && j > 0 && k > 0 && l > 0 => {
                let q = (i - 1, j - 1, k - 1, l - 1);
                for (a, b, c, d) in eightfold(q.0, q.1, q.2, q.3) {
                    if let Some(prev) = two_seen.insert((a, b, c, d), value) {
                        if (prev - value).abs() > 1e-10 {
                            return Err(parse_error(
                                line_no,
                                format!(
                                    "two-body element ({i}{j}|{k}{l}) breaks 8-fold symmetry with an earlier value"
                                ),
                            ));
                        }
                    }
                    two_body[flat(a, b, c, d)] = value;
                }
            }
            _ => {
                return Err(parse_error(
                    line_no,
                    format!("unclassifiable index pattern {i} {j} {k} {l}"),
                ));
            }
        }
    }

    IntegralSet::new(norb, core_energy, one_body, two_body, nelec, ms2)
}

pub fn read_fcidump(path: impl AsRef<Path>) -> Result<IntegralSet> {
    let text = std::fs::read_to_string(path)?;
    parse_fcidump(&text)
}
