//! The eight prompt bodies, shipped verbatim as files under `templates/`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use valuescope_core::io::content_hash;

use crate::error::{GatewayError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateId {
    ShortForm,
    ShortFormWithValues,
    LongForm,
    ExtractArguments,
    AssignValues,
    SpecPath,
    SpecAttr,
    StandardizeValue,
}

impl TemplateId {
    pub const ALL: [TemplateId; 8] = [
        TemplateId::ShortForm,
        TemplateId::ShortFormWithValues,
        TemplateId::LongForm,
        TemplateId::ExtractArguments,
        TemplateId::AssignValues,
        TemplateId::SpecPath,
        TemplateId::SpecAttr,
        TemplateId::StandardizeValue,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TemplateId::ShortForm => "short_form",
            TemplateId::ShortFormWithValues => "short_form_with_values",
            TemplateId::LongForm => "long_form",
            TemplateId::ExtractArguments => "extract_arguments",
            TemplateId::AssignValues => "assign_values",
            TemplateId::SpecPath => "spec_path",
            TemplateId::SpecAttr => "spec_attr",
            TemplateId::StandardizeValue => "standardize_value",
        }
    }

    /// Template text with the file's final newline removed.
    pub fn body(self) -> &'static str {
        let raw = match self {
            TemplateId::ShortForm => include_str!("../templates/short_form.txt"),
            TemplateId::ShortFormWithValues => include_str!("../templates/short_form_with_values.txt"),
            TemplateId::LongForm => include_str!("../templates/long_form.txt"),
            TemplateId::ExtractArguments => include_str!("../templates/extract_arguments.txt"),
            TemplateId::AssignValues => include_str!("../templates/assign_values.txt"),
            TemplateId::SpecPath => include_str!("../templates/spec_path.txt"),
            TemplateId::SpecAttr => include_str!("../templates/spec_attr.txt"),
            TemplateId::StandardizeValue => include_str!("../templates/standardize_value.txt"),
        };
        raw.strip_suffix('\n').unwrap_or(raw)
    }

    pub fn content_hash(self) -> String {
        content_hash(self.body().as_bytes())
    }

    /// Placeholder names in order of first appearance.
    pub fn placeholders(self) -> Vec<&'static str> {
        let mut out = Vec::new();
        for seg in segments(self.body()) {
            if let Segment::Placeholder(name) = seg {
                if !out.contains(&name) {
                    out.push(name);
                }
            }
        }
        out
    }

    pub fn render(self, bindings: &BTreeMap<&str, String>) -> Result<String> {
        let mut out = String::with_capacity(self.body().len());
        for seg in segments(self.body()) {
            match seg {
                Segment::Text(t) => out.push_str(t),
                Segment::Placeholder(name) => match bindings.get(name) {
                    Some(v) => out.push_str(v),
                    None => {
                        return Err(GatewayError::MissingBinding {
                            template: self.as_str(),
                            placeholder: name.to_string(),
                        })
                    }
                },
            }
        }
        Ok(out)
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TemplateId {
    type Err = GatewayError;

    fn from_str(s: &str) -> Result<Self> {
        TemplateId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| GatewayError::UnknownTemplate(s.to_string()))
    }
}

/// Renders `id` with the given bindings.
pub fn render_prompt(id: TemplateId, bindings: &BTreeMap<&str, String>) -> Result<String> {
    id.render(bindings)
}

enum Segment<'a> {
    Text(&'a str),
    Placeholder(&'a str),
}

/// Splits a body into literal text and `{identifier}` placeholders. Braces
/// not enclosing an identifier (JSON in the examples) are literal.
fn segments(body: &str) -> Vec<Segment<'_>> {
    let bytes = body.as_bytes();
    let mut out = Vec::new();
    let (mut start, mut i) = (0, 0);
    while i < bytes.len() {
        if bytes[i] == b'{' {
            let rest = &body[i + 1..];
            let len = rest
                .bytes()
                .take_while(|b| b.is_ascii_alphanumeric() || *b == b'_')
                .count();
            let starts_ok = rest.bytes().next().is_some_and(|b| b.is_ascii_alphabetic() || b == b'_');
            if starts_ok && rest.as_bytes().get(len) == Some(&b'}') {
                if start < i {
                    out.push(Segment::Text(&body[start..i]));
                }
                out.push(Segment::Placeholder(&rest[..len]));
                i += len + 2;
                start = i;
                continue;
            }
        }
        i += 1;
    }
    if start < body.len() {
        out.push(Segment::Text(&body[start..]));
    }
    out
}
