use super::{Directive, DirectiveKind, MaskError, MaskLine, MaskScript, MARK_REGISTERS};

const DIRECTIVE_OPEN: &str = "<RPWI:";
const NOTE_SHORT: &str = "<*>";

/// `[A-Za-z_][A-Za-z0-9_]*`
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Parses mask source into classified lines and checks the structural rules:
/// balanced TEST blocks, mark numbers in range, VALUE/POSITIVE/NEGATIVE only
/// inside a TEST block, single-character IGNORELAST arguments.
pub fn parse_mask(text: &str) -> Result<MaskScript, MaskError> {
    let mut lines = Vec::new();
    let mut open_tests: Vec<usize> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = raw.trim_start();
        let parsed = if let Some(rest) = trimmed.strip_prefix(DIRECTIVE_OPEN) {
            let close = rest
                .find('>')
                .ok_or(MaskError::MalformedDirective { line: line_no })?;
            let name = &rest[..close];
            let arg = rest[close + 1..].trim();
            let kind =
                DirectiveKind::from_keyword(name).ok_or_else(|| MaskError::UnknownDirective {
                    line: line_no,
                    name: name.to_owned(),
                })?;
            MaskLine::Directive(parse_directive(kind, arg, line_no)?)
        } else if let Some(rest) = trimmed.strip_prefix(NOTE_SHORT) {
            MaskLine::Directive(Directive::Note(rest.trim().to_owned()))
        } else {
            MaskLine::Literal(raw.to_owned())
        };

        if let MaskLine::Directive(d) = &parsed {
            match d {
                Directive::Test(_) => open_tests.push(line_no),
                Directive::EndTest => {
                    if open_tests.pop().is_none() {
                        return Err(MaskError::UnbalancedTest { line: line_no });
                    }
                }
                Directive::Value(_) | Directive::Positive | Directive::Negative
                    if open_tests.is_empty() =>
                {
                    return Err(MaskError::MisplacedDirective {
                        line: line_no,
                        name: d.kind().keyword().to_owned(),
                    });
                }
                _ => {}
            }
        }
        lines.push(parsed);
    }

    if let Some(&line) = open_tests.last() {
        return Err(MaskError::UnbalancedTest { line });
    }
    Ok(MaskScript { lines })
}

fn parse_directive(kind: DirectiveKind, arg: &str, line: usize) -> Result<Directive, MaskError> {
    let bad = |reason: &str| MaskError::BadArgument {
        line,
        name: kind.keyword().to_owned(),
        reason: reason.to_owned(),
    };
    let no_arg = |d: Directive| {
        if arg.is_empty() {
            Ok(d)
        } else {
            Err(bad("takes no argument"))
        }
    };
    let variable = || {
        let name = arg
            .strip_prefix('<')
            .and_then(|s| s.strip_suffix('>'))
            .unwrap_or(arg);
        if is_identifier(name) {
            Ok(name.to_owned())
        } else {
            Err(bad("expected a variable name"))
        }
    };
    let mark = || -> Result<u8, MaskError> {
        let n: i64 = arg.parse().map_err(|_| bad("expected a number 1..30"))?;
        if (1..=MARK_REGISTERS as i64).contains(&n) {
            Ok(n as u8)
        } else {
            Err(MaskError::MarkOutOfRange { line, value: n })
        }
    };

    Ok(match kind {
        DirectiveKind::NewStep => Directive::NewStep(arg.to_owned()),
        DirectiveKind::Test => Directive::Test(variable()?),
        DirectiveKind::EndTest => no_arg(Directive::EndTest)?,
        DirectiveKind::Value => Directive::Value(arg.to_owned()),
        DirectiveKind::Positive => no_arg(Directive::Positive)?,
        DirectiveKind::Negative => no_arg(Directive::Negative)?,
        DirectiveKind::Information => Directive::Information(arg.to_owned()),
        DirectiveKind::Note => Directive::Note(arg.to_owned()),
        DirectiveKind::PutMark => Directive::PutMark(mark()?),
        DirectiveKind::SetMark => Directive::SetMark(mark()?),
        DirectiveKind::IgnoreLast => {
            let mut chars = arg.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => Directive::IgnoreLast(c),
                _ => return Err(bad("expected exactly one character")),
            }
        }
        DirectiveKind::NewVar => Directive::NewVar(variable()?),
        DirectiveKind::SetVarValue => Directive::SetVarValue(arg.to_owned()),
        DirectiveKind::SelectVar => Directive::SelectVar(variable()?),
        DirectiveKind::ReplaceVarsWithValues => no_arg(Directive::ReplaceVarsWithValues)?,
    })
}
