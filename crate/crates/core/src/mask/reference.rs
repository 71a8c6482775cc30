//! Straight-line mask interpreter used as a differential oracle for
//! [`evaluate_mask`](super::evaluate_mask).
//!
//! One pass over the lines with a skip counter, a forward rescan to configure
//! each TEST as it is reached, and regex-based substitution. Nothing here is
//! shared with the compiled evaluator except the parsed line types.

use std::collections::HashMap;
use std::sync::OnceLock;

use regex::{Captures, Regex};

use super::{
    Bindings, Directive, GeneratedStep, GenerationResult, MaskError, MaskLine, MaskScript, SlotRef,
    MARK_REGISTERS,
};

fn token_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<([A-Za-z_][A-Za-z0-9_]*)>").unwrap())
}

fn subst(text: &str, vars: &HashMap<String, String>) -> String {
    token_re()
        .replace_all(text, |caps: &Captures| match vars.get(&caps[1]) {
            Some(v) => v.clone(),
            None => caps[0].to_owned(),
        })
        .into_owned()
}

/// Looks ahead from the line after a TEST to its matching ENDTEST and returns
/// the block's (value, negative) configuration. Last directive wins.
fn test_config(lines: &[MaskLine], test_at: usize) -> (String, bool) {
    let mut depth = 0usize;
    let mut value = String::new();
    let mut negative = false;
    for line in &lines[test_at + 1..] {
        let MaskLine::Directive(d) = line else {
            continue;
        };
        match d {
            Directive::Test(_) => depth += 1,
            Directive::EndTest if depth == 0 => break,
            Directive::EndTest => depth -= 1,
            Directive::Value(v) if depth == 0 => value = v.clone(),
            Directive::Positive if depth == 0 => negative = false,
            Directive::Negative if depth == 0 => negative = true,
            _ => {}
        }
    }
    (value, negative)
}

struct Out {
    labels: Vec<String>,
    parents: Vec<SlotRef>,
    // index 0 is the anchor, index i+1 is generated step i
    code: Vec<Vec<String>>,
    info: Vec<Vec<String>>,
}

fn slot_index(slot: SlotRef) -> usize {
    match slot {
        SlotRef::Anchor => 0,
        SlotRef::Step(i) => i + 1,
    }
}

/// Same contract as [`evaluate_mask`](super::evaluate_mask).
pub fn reference_evaluate(
    script: &MaskScript,
    bindings: &Bindings,
) -> Result<GenerationResult, MaskError> {
    let lines = &script.lines;
    let mut vars: HashMap<String, String> = bindings
        .iter()
        .map(|(k, v)| (k.to_owned(), v.to_owned()))
        .collect();
    let mut active: Option<String> = bindings.active().map(str::to_owned);
    let mut marks: [Option<SlotRef>; MARK_REGISTERS] = [None; MARK_REGISTERS];
    let mut current = SlotRef::Anchor;
    let mut parent = SlotRef::Anchor;
    let mut out = Out {
        labels: Vec::new(),
        parents: Vec::new(),
        code: vec![Vec::new()],
        info: vec![Vec::new()],
    };
    let mut skipping = 0usize;

    for (pc, line) in lines.iter().enumerate() {
        if skipping > 0 {
            match line {
                MaskLine::Directive(Directive::Test(_)) => skipping += 1,
                MaskLine::Directive(Directive::EndTest) => skipping -= 1,
                _ => {}
            }
            continue;
        }
        let d = match line {
            MaskLine::Literal(text) => {
                let rendered = subst(text, &vars);
                out.code[slot_index(current)].push(rendered);
                continue;
            }
            MaskLine::Directive(d) => d,
        };
        match d {
            Directive::Test(var) => {
                let actual = vars
                    .get(var)
                    .ok_or_else(|| MaskError::UnboundVariable(var.clone()))?;
                let (value, negative) = test_config(lines, pc);
                let passed = if negative {
                    *actual != value
                } else {
                    *actual == value
                };
                if !passed {
                    skipping = 1;
                }
            }
            Directive::EndTest
            | Directive::Value(_)
            | Directive::Positive
            | Directive::Negative
            | Directive::Note(_) => {}
            Directive::NewStep(label) => {
                out.labels.push(subst(label, &vars));
                out.parents.push(parent);
                out.code.push(Vec::new());
                out.info.push(Vec::new());
                current = SlotRef::Step(out.labels.len() - 1);
            }
            Directive::Information(text) => {
                let rendered = subst(text, &vars);
                out.info[slot_index(current)].push(rendered);
            }
            Directive::PutMark(n) => marks[*n as usize - 1] = Some(current),
            Directive::SetMark(n) => match marks[*n as usize - 1] {
                Some(slot) => {
                    parent = slot;
                    current = slot;
                }
                None => return Err(MaskError::EmptyMark(*n)),
            },
            Directive::IgnoreLast(c) => {
                // Join, cut the last match, split back.
                let buf = &mut out.code[slot_index(current)];
                let joined = buf.join("\n");
                if let Some(pos) = joined.rfind(*c) {
                    let mut s = joined;
                    s.remove(pos);
                    *buf = s.split('\n').map(str::to_owned).collect();
                }
            }
            Directive::NewVar(name) => {
                vars.insert(name.clone(), String::new());
                active = Some(name.clone());
            }
            Directive::SetVarValue(text) => {
                let value = subst(text, &vars);
                match &active {
                    Some(name) => {
                        vars.insert(name.clone(), value);
                    }
                    None => return Err(MaskError::NoActiveVariable),
                }
            }
            Directive::SelectVar(name) => {
                if !vars.contains_key(name) {
                    return Err(MaskError::UnboundVariable(name.clone()));
                }
                active = Some(name.clone());
            }
            Directive::ReplaceVarsWithValues => {
                for l in out.labels.iter_mut() {
                    *l = subst(l, &vars);
                }
                for buf in out.code.iter_mut().chain(out.info.iter_mut()) {
                    for l in buf.iter_mut() {
                        *l = subst(l, &vars);
                    }
                }
            }
        }
    }

    // Final unbound check in canonical order: anchor code, anchor info, then
    // each step's label, code and info.
    let mut texts: Vec<&String> = Vec::new();
    texts.extend(out.code[0].iter());
    texts.extend(out.info[0].iter());
    for i in 0..out.labels.len() {
        texts.push(&out.labels[i]);
        texts.extend(out.code[i + 1].iter());
        texts.extend(out.info[i + 1].iter());
    }
    for text in texts {
        for caps in token_re().captures_iter(text) {
            if !vars.contains_key(&caps[1]) {
                return Err(MaskError::UnboundVariable(caps[1].to_owned()));
            }
        }
    }

    let mut code = out.code.into_iter();
    let mut info = out.info.into_iter();
    let anchor_code = code.next().unwrap_or_default();
    let anchor_info = info.next().unwrap_or_default();
    let steps = out
        .labels
        .into_iter()
        .zip(out.parents)
        .zip(code.zip(info))
        .map(|((label, parent), (code, info))| GeneratedStep {
            label,
            code,
            info,
            parent,
        })
        .collect();
    Ok(GenerationResult {
        steps,
        anchor_code,
        anchor_info,
        marks: marks.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mask::{evaluate_mask, parse_mask};

    #[test]
    fn agrees_on_print_mask() {
        let script = parse_mask(
            "<RPWI:NEWSTEP> Print Text – New Line – (<T_V1>)\ncout << <T_V1> << \"\\n\" ;",
        )
        .unwrap();
        let b = Bindings::new().with("T_V1", "\"Hello World\"");
        assert_eq!(reference_evaluate(&script, &b), evaluate_mask(&script, &b));
    }

    #[test]
    fn nested_skip() {
        let script = parse_mask(
            "<RPWI:TEST> A\n<RPWI:VALUE> 1\n<RPWI:TEST> B\n<RPWI:VALUE> 1\n<RPWI:NEWSTEP> inner\n<RPWI:ENDTEST>\n<RPWI:NEWSTEP> outer\n<RPWI:ENDTEST>\n<RPWI:NEWSTEP> after",
        )
        .unwrap();
        for (a, b) in [("1", "1"), ("1", "0"), ("0", "1")] {
            let bind = Bindings::new().with("A", a).with("B", b);
            assert_eq!(
                reference_evaluate(&script, &bind),
                evaluate_mask(&script, &bind)
            );
        }
        let r =
            reference_evaluate(&script, &Bindings::new().with("A", "1").with("B", "0")).unwrap();
        assert_eq!(
            r.steps.iter().map(|s| s.label.as_str()).collect::<Vec<_>>(),
            ["outer", "after"]
        );
    }
}
