//! S-expression syntax for processes.
//!
//! ```text
//! program  := def* process
//! def      := (def (Ident param*) process)
//! process  := 0
//!           | (out chan (name*) process?)
//!           | (in chan (binder*) process?)
//!           | (| process*)            parallel composition
//!           | (+ process*)            choice
//!           | (new (name*) process)   restriction
//!           | (! process)             replication
//!           | (apply fn (arg*) result process?)
//!           | (call Ident name*)
//! ```
//!
//! Names are identifiers (letters, digits, `_`, `'`, `#`, `~`) or integers;
//! integers denote literal values. `;` starts a comment that runs to the end
//! of the line. The printed form of a process (its `Display`) parses back to
//! an alpha-equivalent process.

use super::{Name, PiError, Process, Universe};
use crate::symbol::Symbol;

/// A parsed program: its definitions registered in a universe, and the
/// process to run.
#[derive(Debug)]
pub struct Program {
    pub universe: Universe,
    pub process: Process,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

#[derive(Debug, Clone)]
enum Sexp {
    Atom(String, usize),
    List(Vec<Sexp>, usize),
}

impl Sexp {
    fn line(&self) -> usize {
        match self {
            Sexp::Atom(_, l) | Sexp::List(_, l) => *l,
        }
    }
}

fn err(line: usize, message: impl Into<String>) -> PiError {
    PiError::Parse {
        line,
        message: message.into(),
    }
}

fn tokenize(text: &str) -> Vec<(Tok, usize)> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let code = line.split(';').next().unwrap_or("");
        let mut atom = String::new();
        for ch in code.chars() {
            let delim = ch == '(' || ch == ')' || ch.is_whitespace();
            if delim && !atom.is_empty() {
                out.push((Tok::Atom(std::mem::take(&mut atom)), line_no));
            }
            match ch {
                '(' => out.push((Tok::Open, line_no)),
                ')' => out.push((Tok::Close, line_no)),
                c if c.is_whitespace() => {}
                c => atom.push(c),
            }
        }
        if !atom.is_empty() {
            out.push((Tok::Atom(atom), line_no));
        }
    }
    out
}

fn read_all(text: &str) -> Result<Vec<Sexp>, PiError> {
    let toks = tokenize(text);
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < toks.len() {
        out.push(read(&toks, &mut pos)?);
    }
    Ok(out)
}

fn read(toks: &[(Tok, usize)], pos: &mut usize) -> Result<Sexp, PiError> {
    let (tok, line) = toks[*pos].clone();
    *pos += 1;
    match tok {
        Tok::Atom(a) => Ok(Sexp::Atom(a, line)),
        Tok::Close => Err(err(line, "unexpected ')'")),
        Tok::Open => {
            let mut items = Vec::new();
            loop {
                match toks.get(*pos) {
                    None => return Err(err(line, "unclosed '('")),
                    Some((Tok::Close, _)) => {
                        *pos += 1;
                        return Ok(Sexp::List(items, line));
                    }
                    Some(_) => items.push(read(toks, pos)?),
                }
            }
        }
    }
}

fn is_ident(s: &str) -> bool {
    !s.is_empty()
        && s
            .chars()
            .all(|c| c.is_alphanumeric() || matches!(c, '_' | '\'' | '#' | '~'))
}

fn name(s: &Sexp) -> Result<Name, PiError> {
    match s {
        Sexp::Atom(a, line) => {
            if let Ok(v) = a.parse::<i64>() {
                Ok(Name::lit(v))
            } else if is_ident(a) {
                Ok(Name::user(a))
            } else {
                Err(err(*line, format!("'{a}' is not a name")))
            }
        }
        Sexp::List(_, line) => Err(err(*line, "expected a name, found a list")),
    }
}

fn names(s: &Sexp) -> Result<Vec<Name>, PiError> {
    match s {
        Sexp::List(items, _) => items.iter().map(name).collect(),
        Sexp::Atom(a, line) => Err(err(*line, format!("expected a name list, found '{a}'"))),
    }
}

fn cont(rest: &[Sexp], line: usize) -> Result<Process, PiError> {
    match rest {
        [] => Ok(Process::Nil),
        [p] => process(p),
        _ => Err(err(line, "too many continuation processes")),
    }
}

fn process(s: &Sexp) -> Result<Process, PiError> {
    let (items, line) = match s {
        Sexp::Atom(a, line) if a == "0" => return Ok(Process::Nil),
        Sexp::Atom(a, line) => return Err(err(*line, format!("unexpected atom '{a}'"))),
        Sexp::List(items, line) => (items, *line),
    };
    let Some(Sexp::Atom(head, _)) = items.first() else {
        return Err(err(line, "expected an operator"));
    };
    let args = &items[1..];
    match head.as_str() {
        "out" | "in" => {
            if args.len() < 2 {
                return Err(err(line, format!("{head} needs a channel and a name list")));
            }
            let ch = name(&args[0])?;
            let ns = names(&args[1])?;
            let k = cont(&args[2..], line)?;
            Ok(if head == "out" {
                Process::output(ch, ns, k)
            } else {
                Process::input(ch, ns, k)
            })
        }
        "|" => Ok(Process::par_all(
            args.iter().map(process).collect::<Result<Vec<_>, _>>()?,
        )),
        "+" => Ok(Process::choice_all(
            args.iter().map(process).collect::<Result<Vec<_>, _>>()?,
        )),
        "new" => match args {
            [ns, body] => Ok(Process::restrict_all(names(ns)?, process(body)?)),
            _ => Err(err(line, "new takes a name list and a body")),
        },
        "!" => match args {
            [body] => Ok(Process::replicate(process(body)?)),
            _ => Err(err(line, "! takes one body")),
        },
        "apply" => {
            if args.len() < 3 {
                return Err(err(line, "apply needs a function, arguments and a result"));
            }
            let Sexp::Atom(f, _) = &args[0] else {
                return Err(err(line, "function name must be an atom"));
            };
            let result = name(&args[2])?;
            if result.literal_value().is_some() {
                return Err(err(line, "apply result must be a name"));
            }
            Ok(Process::apply(
                Symbol::intern(f),
                names(&args[1])?,
                result,
                cont(&args[3..], line)?,
            ))
        }
        "call" => {
            let Some(Sexp::Atom(ident, _)) = args.first() else {
                return Err(err(line, "call needs an identifier"));
            };
            Ok(Process::Call {
                ident: Symbol::intern(ident),
                args: args[1..].iter().map(name).collect::<Result<_, _>>()?,
            })
        }
        other => Err(err(line, format!("unknown operator '{other}'"))),
    }
}

/// Parses a single process expression.
pub fn parse_process(text: &str) -> Result<Process, PiError> {
    let forms = read_all(text)?;
    match forms.as_slice() {
        [p] => process(p),
        [] => Err(err(1, "empty input")),
        [_, extra, ..] => Err(err(extra.line(), "trailing input after process")),
    }
}

/// Parses definitions followed by one process. Definitions are added to
/// `universe`.
pub fn parse_program(text: &str, mut universe: Universe) -> Result<Program, PiError> {
    let forms = read_all(text)?;
    let Some((last, defs)) = forms.split_last() else {
        return Err(err(1, "empty program"));
    };
    for d in defs {
        let Sexp::List(items, line) = d else {
            return Err(err(d.line(), "expected a definition"));
        };
        let [Sexp::Atom(kw, _), Sexp::List(sig, _), body] = items.as_slice() else {
            return Err(err(*line, "expected (def (Ident params...) body)"));
        };
        if kw != "def" {
            return Err(err(*line, format!("expected def, found '{kw}'")));
        }
        let Some(Sexp::Atom(ident, _)) = sig.first() else {
            return Err(err(*line, "definition needs an identifier"));
        };
        let params = sig[1..].iter().map(name).collect::<Result<Vec<_>, _>>()?;
        universe.define(ident, params, process(body)?)?;
    }
    Ok(Program {
        universe,
        process: process(last)?,
    })
}

#[cfg(test)]
mod tests {
    use super::super::normalize;
    use super::*;

    #[test]
    fn display_round_trips() {
        let text = "(new (i o) (| (call B i o) (out i (5) (out i (6) (in o (x))))))";
        let def = "(def (B i o) (in i (x) (+ (out o (x) (call B i o)) (call B i o))))";
        let prog = parse_program(&format!("{def}\n{text}"), Universe::new()).unwrap();
        let printed = prog.process.to_string();
        let again = parse_process(&printed).unwrap();
        assert_eq!(
            normalize(&again, &prog.universe).unwrap(),
            normalize(&prog.process, &prog.universe).unwrap()
        );
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_process("(|\n (out a (x))\n (bogus))").unwrap_err();
        assert!(matches!(e, PiError::Parse { line: 3, .. }), "{e}");
    }
}
