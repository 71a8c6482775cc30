use super::Bindings;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    pub text: String,
    /// Names of `<NAME>` tokens left in place because they had no binding.
    pub unbound: Vec<String>,
}

/// Scans for a `<identifier>` token starting at byte `start` (which holds `<`).
/// Returns the identifier and the byte index just past the closing `>`.
pub(super) fn token_at(text: &str, start: usize) -> Option<(&str, usize)> {
    let bytes = text.as_bytes();
    debug_assert_eq!(bytes[start], b'<');
    let name_start = start + 1;
    let mut i = name_start;
    while i < bytes.len() {
        let b = bytes[i];
        let ok = if i == name_start {
            b.is_ascii_alphabetic() || b == b'_'
        } else {
            b.is_ascii_alphanumeric() || b == b'_'
        };
        if !ok {
            break;
        }
        i += 1;
    }
    if i > name_start && i < bytes.len() && bytes[i] == b'>' {
        Some((&text[name_start..i], i + 1))
    } else {
        None
    }
}

/// Replaces each `<NAME>` token whose name is bound with its value. One pass:
/// inserted values are never rescanned.
pub fn substitute_variables(text: &str, bindings: &Bindings) -> Substitution {
    let mut out = String::with_capacity(text.len());
    let mut unbound = Vec::new();
    let mut copied = 0;
    let mut i = 0;
    let bytes = text.as_bytes();
    while i < bytes.len() {
        if bytes[i] == b'<' {
            if let Some((name, end)) = token_at(text, i) {
                if let Some(value) = bindings.get(name) {
                    out.push_str(&text[copied..i]);
                    out.push_str(value);
                    copied = end;
                } else {
                    unbound.push(name.to_owned());
                }
                i = end;
                continue;
            }
        }
        i += 1;
    }
    out.push_str(&text[copied..]);
    Substitution { text: out, unbound }
}

/// All `<NAME>` token names in `text`, in order of appearance.
pub fn find_tokens(text: &str) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut names = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'<' {
            if let Some((name, end)) = token_at(text, i) {
                names.push(name.to_owned());
                i = end;
                continue;
            }
        }
        i += 1;
    }
    names
}
