//! Instance parsing and serialization.
//!
//! Two formats are supported:
//!
//! * the native text format (header `wcsp-bound 1`), which is a lossless,
//!   arity-generic dump of a structure and its maximization weights;
//! * the plain-text cost-function-network format used by the common WCSP
//!   benchmark files, which is minimization-convention and converted to
//!   maximization on read by negating all costs. Costs at or above the
//!   declared global upper bound become minus infinity.

use crate::error::{Error, Result};
use crate::model::{Scope, WcspStructure, WeightVector};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line: line + 1, msg: msg.into() }
}

/// Lines with content: (zero-based index, trimmed text), comments stripped.
fn content_lines(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect()
}

const NATIVE_MAGIC: &str = "wcsp-bound 1";

/// Does the document look like the native format?
pub fn is_native(text: &str) -> bool {
    content_lines(text)
        .first()
        .map(|&(_, l)| l == NATIVE_MAGIC)
        .unwrap_or(false)
}

fn parse_weight(line: usize, tok: &str) -> Result<f64> {
    if tok == "-inf" {
        return Ok(f64::NEG_INFINITY);
    }
    let v: f64 = tok
        .parse()
        .map_err(|_| parse_err(line, format!("bad weight '{tok}'")))?;
    if v.is_nan() || v == f64::INFINITY {
        return Err(parse_err(line, format!("weight '{tok}' must be finite or -inf")));
    }
    Ok(v)
}

/// Parses the native instance format.
pub fn parse_native(text: &str) -> Result<(WcspStructure, WeightVector)> {
    let lines = content_lines(text);
    let mut it = lines.iter();

    let &(ln, magic) = it.next().ok_or(parse_err(0, "empty document"))?;
    if magic != NATIVE_MAGIC {
        return Err(parse_err(ln, format!("expected header '{NATIVE_MAGIC}'")));
    }

    let &(ln, vars_line) = it.next().ok_or(parse_err(ln, "missing 'variables' line"))?;
    let var_count: usize = vars_line
        .strip_prefix("variables ")
        .and_then(|s| s.trim().parse().ok())
        .ok_or(parse_err(ln, "expected 'variables <count>'"))?;

    let &(ln, doms_line) = it.next().ok_or(parse_err(ln, "missing 'domains' line"))?;
    let doms: Vec<usize> = doms_line
        .strip_prefix("domains")
        .map(|s| s.split_whitespace().map(|t| t.parse().map_err(|_| ()) ).collect::<std::result::Result<Vec<_>, _>>())
        .transpose()
        .map_err(|_| parse_err(ln, "bad domain size"))?
        .ok_or(parse_err(ln, "expected 'domains <d1> ... <dn>'"))?;
    if doms.len() != var_count {
        return Err(parse_err(ln, format!("expected {var_count} domain sizes, found {}", doms.len())));
    }

    let mut scopes = Vec::new();
    let mut blocks: Vec<(usize, Vec<f64>)> = Vec::new();
    for &(ln, line) in it {
        let rest = line
            .strip_prefix("scope")
            .ok_or(parse_err(ln, "expected 'scope <vars...> : <weights...>'"))?;
        let (vars_part, weights_part) = rest
            .split_once(':')
            .ok_or(parse_err(ln, "missing ':' between variables and weights"))?;
        let vars: Vec<usize> = vars_part
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad variable index '{t}'"))))
            .collect::<Result<_>>()?;
        let scope = Scope::new(vars).map_err(|e| parse_err(ln, e.to_string()))?;
        if scope.vars().iter().any(|&v| v >= var_count) {
            return Err(parse_err(ln, "scope references an unknown variable"));
        }
        let expected: usize = scope.vars().iter().map(|&v| doms[v]).product();
        let weights: Vec<f64> = weights_part
            .split_whitespace()
            .map(|t| parse_weight(ln, t))
            .collect::<Result<_>>()?;
        if weights.len() != expected {
            return Err(parse_err(
                ln,
                format!("scope {scope} needs {expected} weights, found {}", weights.len()),
            ));
        }
        scopes.push(scope);
        blocks.push((ln, weights));
    }
    if scopes.is_empty() {
        return Err(parse_err(lines.last().map(|&(l, _)| l).unwrap_or(0), "no scopes declared"));
    }

    let structure = WcspStructure::new(doms, scopes).map_err(|e| Error::Parse {
        line: 0,
        msg: e.to_string(),
    })?;
    let mut weights = Vec::with_capacity(structure.tuple_count());
    for (_, block) in blocks {
        weights.extend(block);
    }
    let w = WeightVector::from_vec(&structure, weights)
        .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    Ok((structure, w))
}

fn format_weight(w: f64) -> String {
    if w == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{w}")
    }
}

/// Serializes an instance to the native format; `parse_native` inverts this
/// losslessly.
pub fn emit_native(structure: &WcspStructure, f: &WeightVector) -> String {
    let mut out = String::new();
    out.push_str(NATIVE_MAGIC);
    out.push('\n');
    out.push_str(&format!("variables {}\n", structure.variable_count()));
    out.push_str("domains");
    for v in 0..structure.variable_count() {
        out.push_str(&format!(" {}", structure.domain_size(v)));
    }
    out.push('\n');
    for (si, s) in structure.scopes().iter().enumerate() {
        out.push_str("scope");
        for &v in s.vars() {
            out.push_str(&format!(" {v}"));
        }
        out.push_str(" :");
        for t in structure.block(si) {
            out.push_str(&format!(" {}", format_weight(f.get(t))));
        }
        out.push('\n');
    }
    out
}

/// Parses the benchmark cost-function-network format (minimization,
/// non-negative integer costs) and converts to maximization weights. Only
/// unary and binary cost functions are accepted; unary scopes are created for
/// all variables and repeated functions on a scope accumulate.
pub fn parse_wcsp_file(text: &str) -> Result<(WcspStructure, WeightVector)> {
    let lines = content_lines(text);
    let mut it = lines.iter();

    let &(ln, header) = it.next().ok_or(parse_err(0, "empty document"))?;
    let toks: Vec<&str> = header.split_whitespace().collect();
    if toks.len() != 5 {
        return Err(parse_err(
            ln,
            "expected header '<name> <vars> <maxdom> <functions> <upperbound>'",
        ));
    }
    let var_count: usize = toks[1].parse().map_err(|_| parse_err(ln, "bad variable count"))?;
    let max_dom: usize = toks[2].parse().map_err(|_| parse_err(ln, "bad maximum domain size"))?;
    let fn_count: usize = toks[3].parse().map_err(|_| parse_err(ln, "bad function count"))?;
    let top: i64 = toks[4].parse().map_err(|_| parse_err(ln, "bad global upper bound"))?;
    if var_count == 0 {
        return Err(parse_err(ln, "instance has no variables"));
    }
    if top <= 0 {
        return Err(parse_err(ln, "global upper bound must be positive"));
    }

    let &(ln, doms_line) = it.next().ok_or(parse_err(ln, "missing domain-size line"))?;
    let doms: Vec<usize> = doms_line
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad domain size '{t}'"))))
        .collect::<Result<_>>()?;
    if doms.len() != var_count {
        return Err(parse_err(ln, format!("expected {var_count} domain sizes, found {}", doms.len())));
    }
    if doms.iter().any(|&d| d == 0 || d > max_dom) {
        return Err(parse_err(ln, "domain size out of range"));
    }

    // unary scopes for every variable first, then binary scopes as declared
    let mut scopes: Vec<Vec<usize>> = (0..var_count).map(|v| vec![v]).collect();
    // per-scope costs in minimization convention, saturating at `top`
    let mut costs: Vec<Vec<i64>> = (0..var_count).map(|v| vec![0; doms[v]]).collect();
    let mut scope_lookup: std::collections::HashMap<Vec<usize>, usize> =
        scopes.iter().cloned().zip(0..).collect();

    let mut parsed_fns = 0usize;
    while parsed_fns < fn_count {
        let &(ln, decl) = it
            .next()
            .ok_or(parse_err(lines.last().map(|&(l, _)| l).unwrap_or(0), "missing cost function"))?;
        let toks: Vec<&str> = decl.split_whitespace().collect();
        if toks.is_empty() {
            return Err(parse_err(ln, "empty cost-function declaration"));
        }
        let arity: usize = toks[0].parse().map_err(|_| parse_err(ln, "bad arity"))?;
        if arity == 0 || arity > 2 {
            return Err(parse_err(ln, format!("unsupported arity {arity}")));
        }
        if toks.len() != arity + 3 {
            return Err(parse_err(ln, "expected '<arity> <vars...> <default> <tuples>'"));
        }
        let vars: Vec<usize> = toks[1..1 + arity]
            .iter()
            .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad variable '{t}'"))))
            .collect::<Result<_>>()?;
        if vars.iter().any(|&v| v >= var_count) {
            return Err(parse_err(ln, "cost function references an unknown variable"));
        }
        let mut sorted = vars.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != arity {
            return Err(parse_err(ln, "repeated variable in scope"));
        }
        let default: i64 = toks[arity + 1].parse().map_err(|_| parse_err(ln, "bad default cost"))?;
        let tuple_count: usize = toks[arity + 2].parse().map_err(|_| parse_err(ln, "bad tuple count"))?;
        if default < 0 {
            return Err(parse_err(ln, "negative default cost"));
        }

        let block_len: usize = sorted.iter().map(|&v| doms[v]).product();
        let mut block = vec![default.min(top); block_len];
        for _ in 0..tuple_count {
            let &(ln, row) = it.next().ok_or(parse_err(ln, "missing tuple row"))?;
            let toks: Vec<&str> = row.split_whitespace().collect();
            if toks.len() != arity + 1 {
                return Err(parse_err(ln, "expected '<values...> <cost>'"));
            }
            let values: Vec<usize> = toks[..arity]
                .iter()
                .map(|t| t.parse().map_err(|_| parse_err(ln, format!("bad value '{t}'"))))
                .collect::<Result<_>>()?;
            for (i, &v) in values.iter().enumerate() {
                if v >= doms[vars[i]] {
                    return Err(parse_err(ln, "tuple value out of domain"));
                }
            }
            let cost: i64 = toks[arity].parse().map_err(|_| parse_err(ln, "bad cost"))?;
            if cost < 0 {
                return Err(parse_err(ln, "negative cost"));
            }
            // local index in the ascending-variable layout
            let mut local = 0usize;
            for &sv in &sorted {
                let pos = vars.iter().position(|&v| v == sv).unwrap();
                local = local * doms[sv] + values[pos];
            }
            block[local] = cost.min(top);
        }

        match scope_lookup.get(&sorted) {
            Some(&si) => {
                for (c, add) in costs[si].iter_mut().zip(&block) {
                    *c = c.saturating_add(*add).min(top);
                }
            }
            None => {
                scope_lookup.insert(sorted.clone(), scopes.len());
                scopes.push(sorted);
                costs.push(block);
            }
        }
        parsed_fns += 1;
    }
    if it.next().is_some() {
        return Err(parse_err(lines.last().unwrap().0, "trailing content after last cost function"));
    }

    let scopes = scopes
        .into_iter()
        .map(|v| Scope::new(v).map_err(|e| Error::Parse { line: 0, msg: e.to_string() }))
        .collect::<Result<Vec<_>>>()?;
    let structure = WcspStructure::new(doms, scopes)
        .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    let mut weights = Vec::with_capacity(structure.tuple_count());
    for block in costs {
        for c in block {
            weights.push(if c >= top { f64::NEG_INFINITY } else { -(c as f64) });
        }
    }
    let w = WeightVector::from_vec(&structure, weights)
        .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })?;
    Ok((structure, w))
}

/// Parses either supported format, sniffing the native header.
pub fn parse_any(text: &str) -> Result<(WcspStructure, WeightVector)> {
    if is_native(text) {
        parse_native(text)
    } else {
        parse_wcsp_file(text)
    }
}

/// Normalized bound statistic for maximization bounds (smaller is better):
/// `(worst - method) / (worst - best)`, snapped to 1 when the method is
/// within the best-bound tolerance or when worst and best coincide.
pub fn normalized_bound(method: f64, worst: f64, best: f64) -> Result<f64> {
    if worst < best {
        return Err(Error::BoundOrdering);
    }
    let snap = (method - best).abs() <= (1e-4 * best.abs()).max(0.01);
    if worst == best || snap {
        return Ok(1.0);
    }
    if method > worst || method < best {
        return Err(Error::BoundOrdering);
    }
    Ok((worst - method) / (worst - best))
}
