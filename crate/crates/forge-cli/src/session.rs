//! Line-oriented session files: a ring declaration, named ideals and
//! module presentations, and an ordered list of tasks.

use std::collections::BTreeMap;
use std::sync::Arc;

use forge_core::module::{FreeModule, ModuleMap, Vector};
use forge_core::modules::Presentation;
use forge_core::poly::Polynomial;
use forge_core::ring::{MonomialOrder, PolyRing};
use forge_core::scalar::FieldKind;

#[derive(Debug, Clone, PartialEq)]
pub enum TaskKind {
    Resolve,
    Betti,
    Grade,
    Embed,
    Shamash,
    CheckOic,
    NzdCheck,
    TorSeq,
    Corpus,
}

impl TaskKind {
    pub fn name(&self) -> &'static str {
        match self {
            TaskKind::Resolve => "resolve",
            TaskKind::Betti => "betti",
            TaskKind::Grade => "grade",
            TaskKind::Embed => "embed",
            TaskKind::Shamash => "shamash",
            TaskKind::CheckOic => "check-oic",
            TaskKind::NzdCheck => "nzd-check",
            TaskKind::TorSeq => "tor-seq",
            TaskKind::Corpus => "corpus",
        }
    }

    fn from_name(s: &str) -> Option<TaskKind> {
        Some(match s {
            "resolve" => TaskKind::Resolve,
            "betti" => TaskKind::Betti,
            "grade" => TaskKind::Grade,
            "embed" => TaskKind::Embed,
            "shamash" => TaskKind::Shamash,
            "check-oic" => TaskKind::CheckOic,
            "nzd-check" => TaskKind::NzdCheck,
            "tor-seq" => TaskKind::TorSeq,
            "corpus" => TaskKind::Corpus,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Task {
    pub kind: TaskKind,
    pub name: String,
    /// key=value arguments, insertion-ordered for serialization.
    pub args: Vec<(String, String)>,
    pub line: usize,
}

impl Task {
    pub fn arg(&self, key: &str) -> Option<&str> {
        self.args.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Binding {
    Ideal(Vec<Polynomial>),
    Module(Presentation),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub ring: Arc<PolyRing>,
    /// Bindings in declaration order.
    pub bindings: Vec<(String, Binding)>,
    pub tasks: Vec<Task>,
}

impl Session {
    pub fn binding(&self, name: &str) -> Option<&Binding> {
        self.bindings.iter().find(|(n, _)| n == name).map(|(_, b)| b)
    }
}

#[derive(Debug, Clone)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

fn err<T>(line: usize, column: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, column, message: message.into() })
}

/// Parse the session text; the first error is reported with its location.
pub fn parse_session(text: &str) -> Result<Session, ParseError> {
    let mut ring: Option<Arc<PolyRing>> = None;
    let mut bindings: Vec<(String, Binding)> = Vec::new();
    let mut names: BTreeMap<String, ()> = BTreeMap::new();
    let mut tasks: Vec<Task> = Vec::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line_num = lineno + 1;
        let line = match raw.find('#') {
            Some(i) => &raw[..i],
            None => raw,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let (head, rest) = match trimmed.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (trimmed, ""),
        };
        match head {
            "ring" => {
                if ring.is_some() {
                    return err(line_num, 1, "ring already declared");
                }
                ring = Some(parse_ring(rest, line_num)?);
            }
            "ideal" => {
                let r = ring
                    .as_ref()
                    .ok_or(ParseError { line: line_num, column: 1, message: "ring not declared".into() })?;
                let (name, value) = split_binding(rest, line_num)?;
                if names.insert(name.clone(), ()).is_some() {
                    return err(line_num, 1, format!("name {name} already bound"));
                }
                let gens = value
                    .split(',')
                    .map(|s| {
                        Polynomial::parse(r, s.trim()).map_err(|e| ParseError {
                            line: line_num,
                            column: 1,
                            message: e.to_string(),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                for g in &gens {
                    if let forge_core::poly::Homogeneity::NotHomogeneous = g.homogeneity() {
                        return err(line_num, 1, format!("inhomogeneous generator {g}"));
                    }
                }
                bindings.push((name, Binding::Ideal(gens)));
            }
            "module" => {
                let r = ring
                    .as_ref()
                    .ok_or(ParseError { line: line_num, column: 1, message: "ring not declared".into() })?;
                let (name, value) = split_binding(rest, line_num)?;
                if names.insert(name.clone(), ()).is_some() {
                    return err(line_num, 1, format!("name {name} already bound"));
                }
                let pres = parse_module_value(r, &value, line_num)?;
                bindings.push((name, Binding::Module(pres)));
            }
            "task" => {
                let (kind_name, rest2) = match rest.split_once(char::is_whitespace) {
                    Some((k, r)) => (k, r.trim()),
                    None => (rest, ""),
                };
                let kind = TaskKind::from_name(kind_name).ok_or(ParseError {
                    line: line_num,
                    column: 6,
                    message: format!("unknown task kind {kind_name}"),
                })?;
                let mut parts = rest2.split_whitespace();
                let name = parts
                    .next()
                    .ok_or(ParseError {
                        line: line_num,
                        column: 6,
                        message: "task needs a target name".into(),
                    })?
                    .to_string();
                let mut args = Vec::new();
                for part in parts {
                    match part.split_once('=') {
                        Some((k, v)) => args.push((k.to_string(), v.to_string())),
                        None => {
                            return err(line_num, 1, format!("expected key=value, found {part}"))
                        }
                    }
                }
                // non-corpus tasks must reference a bound (or to-be-bound
                // corpus) name; corpus tasks bind the name themselves
                if kind == TaskKind::Corpus {
                    if names.insert(name.clone(), ()).is_some() {
                        return err(line_num, 1, format!("name {name} already bound"));
                    }
                } else if !names.contains_key(&name) {
                    return err(line_num, 1, format!("unknown name {name}"));
                }
                tasks.push(Task { kind, name, args, line: line_num });
            }
            other => return err(line_num, 1, format!("unknown directive {other}")),
        }
    }

    let ring = ring.ok_or(ParseError { line: 1, column: 1, message: "no ring declared".into() })?;
    Ok(Session { ring, bindings, tasks })
}

fn parse_ring(rest: &str, line: usize) -> Result<Arc<PolyRing>, ParseError> {
    // e.g. `Q[x,y,z] grevlex` or `F31[x,y] lex`
    let (spec, order_name) = match rest.split_once(char::is_whitespace) {
        Some((s, o)) => (s.trim(), o.trim()),
        None => (rest.trim(), "grevlex"),
    };
    let open = spec.find('[').ok_or(ParseError {
        line,
        column: 6,
        message: "expected field[vars]".into(),
    })?;
    if !spec.ends_with(']') {
        return err(line, 6, "expected closing bracket in ring declaration");
    }
    let field_name = &spec[..open];
    let vars_text = &spec[open + 1..spec.len() - 1];
    let field = if field_name == "Q" {
        FieldKind::Rationals
    } else if let Some(ptext) = field_name.strip_prefix('F') {
        let p: u32 = ptext.parse().map_err(|_| ParseError {
            line,
            column: 6,
            message: format!("bad prime {ptext}"),
        })?;
        FieldKind::Prime(p)
    } else {
        return err(line, 6, format!("unknown field {field_name} (use Q or F<p>)"));
    };
    let order = MonomialOrder::from_name(order_name).ok_or(ParseError {
        line,
        column: 6,
        message: format!("unknown order {order_name}"),
    })?;
    let vars: Vec<String> = vars_text.split(',').map(|v| v.trim().to_string()).collect();
    PolyRing::new(vars, field, order).map_err(|e| ParseError {
        line,
        column: 6,
        message: e.to_string(),
    })
}

fn split_binding(rest: &str, line: usize) -> Result<(String, String), ParseError> {
    match rest.split_once('=') {
        Some((name, value)) => Ok((name.trim().to_string(), value.trim().to_string())),
        None => err(line, 1, "expected NAME = ..."),
    }
}

/// `coker [[x,y],[z,x]] twists [0,0]` (twists optional).
fn parse_module_value(
    ring: &Arc<PolyRing>,
    value: &str,
    line: usize,
) -> Result<Presentation, ParseError> {
    let value = value.trim();
    let rest = value.strip_prefix("coker").ok_or(ParseError {
        line,
        column: 1,
        message: "module value must start with 'coker'".into(),
    })?;
    let rest = rest.trim();
    // split off an optional trailing `twists [..]`
    let (matrix_text, twists_text) = match rest.find("twists") {
        Some(i) => (rest[..i].trim(), Some(rest[i + 6..].trim())),
        None => (rest, None),
    };
    let rows = parse_matrix(matrix_text, line)?;
    let nrows = rows.len();
    if nrows == 0 {
        return err(line, 1, "empty relation matrix");
    }
    let ncols = rows[0].len();
    for r in &rows {
        if r.len() != ncols {
            return err(line, 1, "ragged relation matrix");
        }
    }
    let twists: Vec<i64> = match twists_text {
        None => vec![0; nrows],
        Some(t) => {
            let t = t.trim();
            if !t.starts_with('[') || !t.ends_with(']') {
                return err(line, 1, "twists must be a bracketed list");
            }
            t[1..t.len() - 1]
                .split(',')
                .map(|s| {
                    s.trim().parse::<i64>().map_err(|_| ParseError {
                        line,
                        column: 1,
                        message: format!("bad twist {s}"),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?
        }
    };
    if twists.len() != nrows {
        return err(line, 1, "twist count must match the row count");
    }
    let mut cols = Vec::new();
    for j in 0..ncols {
        let entries: Vec<Polynomial> = rows
            .iter()
            .map(|row| {
                Polynomial::parse(ring, &row[j]).map_err(|e| ParseError {
                    line,
                    column: 1,
                    message: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        cols.push(Vector { ring: ring.clone(), entries });
    }
    let target = FreeModule::new(twists);
    let relations = if cols.is_empty() {
        ModuleMap::zero_map(ring, FreeModule::zero(), target)
    } else {
        ModuleMap::from_columns(ring, target, cols).map_err(|e| ParseError {
            line,
            column: 1,
            message: e.to_string(),
        })?
    };
    Ok(Presentation::new(relations, None))
}

/// `[[a,b],[c,d]]` with polynomial entries (entries may not contain
/// brackets or commas).
fn parse_matrix(text: &str, line: usize) -> Result<Vec<Vec<String>>, ParseError> {
    let text = text.trim();
    if !text.starts_with("[[") || !text.ends_with("]]") {
        return err(line, 1, "matrix must look like [[...],[...]]");
    }
    let inner = &text[1..text.len() - 1];
    let mut rows = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for ch in inner.chars() {
        match ch {
            '[' => {
                depth += 1;
                if depth == 1 {
                    current.clear();
                    continue;
                }
            }
            ']' => {
                if depth == 0 {
                    return err(line, 1, "unbalanced brackets in matrix");
                }
                depth -= 1;
                if depth == 0 {
                    rows.push(
                        current
                            .split(',')
                            .map(|s| s.trim().to_string())
                            .collect::<Vec<_>>(),
                    );
                    continue;
                }
            }
            ',' if depth == 0 => continue,
            _ => {}
        }
        if depth >= 1 {
            current.push(ch);
        }
    }
    if depth != 0 {
        return err(line, 1, "unbalanced brackets in matrix");
    }
    Ok(rows)
}

/// Canonical text form; reparsing yields an equal session.
pub fn serialize_session(s: &Session) -> String {
    let mut out = String::new();
    out.push_str(&format!("ring {}\n", s.ring));
    for (name, b) in &s.bindings {
        match b {
            Binding::Ideal(gens) => {
                let parts: Vec<String> = gens.iter().map(|g| g.to_string()).collect();
                out.push_str(&format!("ideal {name} = {}\n", parts.join(", ")));
            }
            Binding::Module(p) => {
                let rel = &p.relations;
                let rows: Vec<String> = (0..rel.target.rank())
                    .map(|i| {
                        let entries: Vec<String> = (0..rel.cols.len())
                            .map(|j| rel.entry(i, j).to_string())
                            .collect();
                        format!("[{}]", entries.join(","))
                    })
                    .collect();
                let twists: Vec<String> =
                    rel.target.twists.iter().map(|t| t.to_string()).collect();
                out.push_str(&format!(
                    "module {name} = coker [{}] twists [{}]\n",
                    rows.join(","),
                    twists.join(",")
                ));
            }
        }
    }
    for t in &s.tasks {
        let mut line = format!("task {} {}", t.kind.name(), t.name);
        for (k, v) in &t.args {
            line.push_str(&format!(" {k}={v}"));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_minimal_session() {
        let text = "ring Q[x,y,z] grevlex\nideal I = x, y\ntask grade I\n";
        let s = parse_session(text).unwrap();
        assert_eq!(s.tasks.len(), 1);
        assert_eq!(s.tasks[0].kind, TaskKind::Grade);
        assert!(matches!(s.binding("I"), Some(Binding::Ideal(g)) if g.len() == 2));
    }

    #[test]
    fn unknown_name_is_diagnosed_at_use_site() {
        let text = "ring Q[x,y] grevlex\ntask grade J\n";
        let e = parse_session(text).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("unknown name J"));
    }

    #[test]
    fn module_matrix_parses_to_presentation() {
        let text = "ring Q[x,y,z] grevlex\nmodule M = coker [[x,y],[z,x]]\ntask betti M\n";
        let s = parse_session(text).unwrap();
        match s.binding("M") {
            Some(Binding::Module(p)) => {
                assert_eq!(p.ambient().rank(), 2);
                assert_eq!(p.relations.cols.len(), 2);
            }
            _ => panic!("module binding missing"),
        }
    }

    #[test]
    fn inhomogeneous_input_rejected_with_location() {
        let text = "ring Q[x,y] grevlex\nideal I = x + y^2\n";
        let e = parse_session(text).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("inhomogeneous"));
    }

    #[test]
    fn round_trip_is_stable() {
        let text = "ring Q[x,y,z] grevlex\nideal I = x^2 - y*z, x*y\nmodule M = coker [[x,y],[z,x]] twists [0,0]\ntask grade I\ntask check-oic M max_i=2 probes=1 seed=5\n";
        let s1 = parse_session(text).unwrap();
        let printed = serialize_session(&s1);
        let s2 = parse_session(&printed).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(printed, serialize_session(&s2));
    }
}
