//! SDPA sparse format (`.dat-s`).
//!
//! Blocks are concatenated into one dense symmetric block. Matrix number 0 is
//! the objective `C` of `min tr(C X)`, and matrices `1..m` are the constraint
//! matrices. The right-hand side line gives `b`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sdp::SdpInstance;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn is_comment(line: &str) -> bool {
    matches!(line.trim_start().chars().next(), Some('"' | '*' | '#'))
}

fn numeric_tokens(line: &str) -> impl Iterator<Item = &str> {
    line.split(|c: char| c.is_whitespace() || matches!(c, ',' | '{' | '}' | '(' | ')')).filter(|t| !t.is_empty())
}

fn parse_num<T: std::str::FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token.parse().map_err(|_| parse_err(line, format!("invalid {what} '{token}'")))
}

pub fn parse_sdpa(text: &str) -> Result<SdpInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !is_comment(l));
    let mut last_line = 0;
    let mut next_line = |what: &str| -> Result<(usize, &str)> {
        let next = lines.next();
        match next {
            Some((no, l)) => {
                last_line = no;
                Ok((no, l))
            }
            None => Err(parse_err(last_line + 1, format!("unexpected end of input, expected {what}"))),
        }
    };

    let (no, l) = next_line("constraint count")?;
    let m: usize = parse_num(numeric_tokens(l).next().unwrap_or(""), no, "constraint count")?;
    let (no, l) = next_line("block count")?;
    let nblocks: usize = parse_num(numeric_tokens(l).next().unwrap_or(""), no, "block count")?;
    if nblocks == 0 {
        return Err(parse_err(no, "block count must be positive"));
    }

    let mut blocks: Vec<i64> = Vec::with_capacity(nblocks);
    while blocks.len() < nblocks {
        let (no, l) = next_line("block sizes")?;
        for tok in numeric_tokens(l) {
            if blocks.len() == nblocks {
                break;
            }
            let size: i64 = parse_num(tok, no, "block size")?;
            if size == 0 {
                return Err(parse_err(no, "block size must be nonzero"));
            }
            blocks.push(size);
        }
    }

    let mut b = Vec::with_capacity(m);
    while b.len() < m {
        let (no, l) = next_line("right-hand side")?;
        for tok in numeric_tokens(l) {
            if b.len() == m {
                break;
            }
            b.push(parse_num::<f64>(tok, no, "right-hand side entry")?);
        }
    }

    let offsets: Vec<usize> = blocks
        .iter()
        .scan(0usize, |acc, s| {
            let start = *acc;
            *acc += s.unsigned_abs() as usize;
            Some(start)
        })
        .collect();
    let n: usize = blocks.iter().map(|s| s.unsigned_abs() as usize).sum();

    let mut mats = vec![DMatrix::<f64>::zeros(n, n); m + 1];
    let mut seen = vec![false; m + 1];
    for (no, l) in lines {
        last_line = no;
        let toks: Vec<&str> = numeric_tokens(l).collect();
        if toks.len() < 5 {
            return Err(parse_err(no, "entry line needs 'matno blkno i j value'"));
        }
        let matno: usize = parse_num(toks[0], no, "matrix number")?;
        let blk: usize = parse_num(toks[1], no, "block number")?;
        let i: usize = parse_num(toks[2], no, "row index")?;
        let j: usize = parse_num(toks[3], no, "column index")?;
        let val: f64 = parse_num(toks[4], no, "value")?;
        if matno > m {
            return Err(parse_err(no, format!("matrix number {matno} exceeds {m}")));
        }
        if blk == 0 || blk > nblocks {
            return Err(parse_err(no, format!("block number {blk} out of range")));
        }
        let size = blocks[blk - 1];
        let dim = size.unsigned_abs() as usize;
        if i == 0 || j == 0 || i > dim || j > dim {
            return Err(parse_err(no, format!("index ({i}, {j}) outside block of size {dim}")));
        }
        if size < 0 && i != j {
            return Err(parse_err(no, "off-diagonal entry in a diagonal block"));
        }
        let (r, c) = (offsets[blk - 1] + i - 1, offsets[blk - 1] + j - 1);
        mats[matno][(r, c)] = val;
        mats[matno][(c, r)] = val;
        seen[matno] |= val != 0.0;
    }
    if let Some(empty) = (1..=m).find(|&k| !seen[k]) {
        return Err(parse_err(last_line, format!("constraint matrix {empty} has no entries")));
    }

    let mut iter = mats.into_iter();
    let c = iter.next().expect("objective matrix present");
    let mut instance = SdpInstance::new(c, iter.collect(), DVector::from_vec(b))?;
    instance.blocks = Some(blocks);
    instance.validate()?;
    Ok(instance)
}

/// Serializes an instance in SDPA sparse format. Values use the shortest
/// representation that parses back to the same double.
pub fn write_sdpa(instance: &SdpInstance) -> Result<String> {
    let n = instance.order();
    let blocks = instance.blocks.clone().unwrap_or_else(|| vec![n as i64]);
    let total: usize = blocks.iter().map(|s| s.unsigned_abs() as usize).sum();
    if total != n {
        return Err(Error::InvariantViolation(format!("block sizes sum to {total}, matrix order is {n}")));
    }
    let mut block_of = Vec::with_capacity(n);
    for (k, s) in blocks.iter().enumerate() {
        for local in 0..s.unsigned_abs() as usize {
            block_of.push((k, local, *s < 0));
        }
    }

    let mut out = String::new();
    let _ = writeln!(out, "\"affscale instance");
    let _ = writeln!(out, "{}", instance.num_constraints());
    let _ = writeln!(out, "{}", blocks.len());
    let sizes: Vec<String> = blocks.iter().map(|s| s.to_string()).collect();
    let _ = writeln!(out, "{}", sizes.join(" "));
    let rhs: Vec<String> = instance.b.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(out, "{}", rhs.join(" "));

    let mats = std::iter::once(&instance.c).chain(instance.constraints.iter());
    for (matno, mat) in mats.enumerate() {
        for i in 0..n {
            for j in i..n {
                let v = mat[(i, j)];
                if v == 0.0 {
                    continue;
                }
                let (bi, li, diagonal) = block_of[i];
                let (bj, lj, _) = block_of[j];
                if bi != bj || (diagonal && i != j) {
                    return Err(Error::InvariantViolation(format!(
                        "matrix {matno} has entry ({i}, {j}) outside the block structure"
                    )));
                }
                let _ = writeln!(out, "{} {} {} {} {}", matno, bi + 1, li + 1, lj + 1, v);
            }
        }
    }
    Ok(out)
}
