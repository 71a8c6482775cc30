//! Mask evaluator.
//!
//! The script is first compiled into a block tree: each TEST block carries its
//! comparison value and polarity resolved up front, and every text argument is
//! pre-split into literal and variable segments. Evaluation then walks the tree
//! and skips failed blocks without visiting their bodies.

use super::subst::token_at;
use super::{
    substitute_variables, Bindings, Directive, GeneratedStep, GenerationResult, MaskError,
    MaskLine, MaskScript, SlotRef,
};

#[derive(Debug)]
enum Segment {
    Text(String),
    Var(String),
}

#[derive(Debug)]
struct Template(Vec<Segment>);

impl Template {
    fn compile(text: &str) -> Self {
        let mut segs = Vec::new();
        let bytes = text.as_bytes();
        let mut copied = 0;
        let mut i = 0;
        while i < bytes.len() {
            if bytes[i] == b'<' {
                if let Some((name, end)) = token_at(text, i) {
                    if copied < i {
                        segs.push(Segment::Text(text[copied..i].to_owned()));
                    }
                    segs.push(Segment::Var(name.to_owned()));
                    copied = end;
                    i = end;
                    continue;
                }
            }
            i += 1;
        }
        if copied < text.len() {
            segs.push(Segment::Text(text[copied..].to_owned()));
        }
        Template(segs)
    }

    fn render(&self, bindings: &Bindings) -> String {
        let mut out = String::new();
        for seg in &self.0 {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Var(name) => match bindings.get(name) {
                    Some(v) => out.push_str(v),
                    None => {
                        out.push('<');
                        out.push_str(name);
                        out.push('>');
                    }
                },
            }
        }
        out
    }
}

#[derive(Debug)]
enum Op {
    NewStep(Template),
    Code(Template),
    Info(Template),
    PutMark(usize),
    SetMark(u8),
    IgnoreLast(char),
    NewVar(String),
    SetVarValue(Template),
    SelectVar(String),
    ReplaceAll,
}

#[derive(Debug)]
enum Node {
    Op(Op),
    Block {
        var: String,
        value: String,
        negative: bool,
        body: Vec<Node>,
    },
}

fn compile(lines: &[MaskLine]) -> Vec<Node> {
    fn block(lines: &[MaskLine], pos: &mut usize) -> (Vec<Node>, Option<String>, bool) {
        let mut nodes = Vec::new();
        let mut value = None;
        let mut negative = false;
        while *pos < lines.len() {
            let line = &lines[*pos];
            *pos += 1;
            let node = match line {
                MaskLine::Literal(t) => Node::Op(Op::Code(Template::compile(t))),
                MaskLine::Directive(d) => match d {
                    Directive::EndTest => return (nodes, value, negative),
                    Directive::Test(var) => {
                        let (body, v, neg) = block(lines, pos);
                        Node::Block {
                            var: var.clone(),
                            value: v.unwrap_or_default(),
                            negative: neg,
                            body,
                        }
                    }
                    Directive::Value(v) => {
                        value = Some(v.clone());
                        continue;
                    }
                    Directive::Positive => {
                        negative = false;
                        continue;
                    }
                    Directive::Negative => {
                        negative = true;
                        continue;
                    }
                    Directive::Note(_) => continue,
                    Directive::NewStep(t) => Node::Op(Op::NewStep(Template::compile(t))),
                    Directive::Information(t) => Node::Op(Op::Info(Template::compile(t))),
                    Directive::PutMark(n) => Node::Op(Op::PutMark(*n as usize - 1)),
                    Directive::SetMark(n) => Node::Op(Op::SetMark(*n)),
                    Directive::IgnoreLast(c) => Node::Op(Op::IgnoreLast(*c)),
                    Directive::NewVar(v) => Node::Op(Op::NewVar(v.clone())),
                    Directive::SetVarValue(t) => Node::Op(Op::SetVarValue(Template::compile(t))),
                    Directive::SelectVar(v) => Node::Op(Op::SelectVar(v.clone())),
                    Directive::ReplaceVarsWithValues => Node::Op(Op::ReplaceAll),
                },
            };
            nodes.push(node);
        }
        (nodes, value, negative)
    }
    let mut pos = 0;
    block(lines, &mut pos).0
}

struct Machine {
    out: GenerationResult,
    current: SlotRef,
    parent: SlotRef,
    bindings: Bindings,
}

impl Machine {
    fn code_buffer(&mut self) -> &mut Vec<String> {
        match self.current {
            SlotRef::Anchor => &mut self.out.anchor_code,
            SlotRef::Step(i) => &mut self.out.steps[i].code,
        }
    }

    fn info_buffer(&mut self) -> &mut Vec<String> {
        match self.current {
            SlotRef::Anchor => &mut self.out.anchor_info,
            SlotRef::Step(i) => &mut self.out.steps[i].info,
        }
    }

    fn run(&mut self, nodes: &[Node]) -> Result<(), MaskError> {
        for node in nodes {
            match node {
                Node::Block {
                    var,
                    value,
                    negative,
                    body,
                } => {
                    let actual = self
                        .bindings
                        .get(var)
                        .ok_or_else(|| MaskError::UnboundVariable(var.clone()))?;
                    if (actual == value) != *negative {
                        self.run(body)?;
                    }
                }
                Node::Op(op) => self.step(op)?,
            }
        }
        Ok(())
    }

    fn step(&mut self, op: &Op) -> Result<(), MaskError> {
        match op {
            Op::NewStep(t) => {
                let label = t.render(&self.bindings);
                self.out.steps.push(GeneratedStep {
                    label,
                    code: Vec::new(),
                    info: Vec::new(),
                    parent: self.parent,
                });
                self.current = SlotRef::Step(self.out.steps.len() - 1);
            }
            Op::Code(t) => {
                let line = t.render(&self.bindings);
                self.code_buffer().push(line);
            }
            Op::Info(t) => {
                let line = t.render(&self.bindings);
                self.info_buffer().push(line);
            }
            Op::PutMark(i) => self.out.marks[*i] = Some(self.current),
            Op::SetMark(n) => {
                let slot = self.out.marks[*n as usize - 1].ok_or(MaskError::EmptyMark(*n))?;
                self.parent = slot;
                self.current = slot;
            }
            Op::IgnoreLast(c) => remove_last_char(self.code_buffer(), *c),
            Op::NewVar(name) => {
                self.bindings.set(name.clone(), "");
                self.bindings.select(name);
            }
            Op::SetVarValue(t) => {
                let value = t.render(&self.bindings);
                let active = self
                    .bindings
                    .active()
                    .ok_or(MaskError::NoActiveVariable)?
                    .to_owned();
                self.bindings.set(active, value);
            }
            Op::SelectVar(name) => {
                if !self.bindings.select(name) {
                    return Err(MaskError::UnboundVariable(name.clone()));
                }
            }
            Op::ReplaceAll => {
                let b = &self.bindings;
                let fix = |s: &mut String| *s = substitute_variables(s, b).text;
                self.out.anchor_code.iter_mut().for_each(fix);
                self.out.anchor_info.iter_mut().for_each(fix);
                for step in &mut self.out.steps {
                    fix(&mut step.label);
                    step.code.iter_mut().for_each(fix);
                    step.info.iter_mut().for_each(fix);
                }
            }
        }
        Ok(())
    }
}

/// Deletes the last occurrence of `c` across the accumulated lines.
fn remove_last_char(lines: &mut [String], c: char) {
    for line in lines.iter_mut().rev() {
        if let Some(pos) = line.rfind(c) {
            line.remove(pos);
            return;
        }
    }
}

/// Runs a parsed mask against `bindings`.
///
/// Fails with `UnboundVariable` when, after the last line, some `<NAME>`
/// token remains in the output and `NAME` has no binding.
pub fn evaluate_mask(
    script: &MaskScript,
    bindings: &Bindings,
) -> Result<GenerationResult, MaskError> {
    let program = compile(&script.lines);
    let mut machine = Machine {
        out: GenerationResult::empty(),
        current: SlotRef::Anchor,
        parent: SlotRef::Anchor,
        bindings: bindings.clone(),
    };
    machine.run(&program)?;
    if let Some(name) = machine.out.first_unbound(&machine.bindings) {
        return Err(MaskError::UnboundVariable(name));
    }
    Ok(machine.out)
}
