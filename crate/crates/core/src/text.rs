//! The `.gsn` textual dialect: parsing and canonical serialization.
//!
//! Grammar (whitespace-insensitive between tokens, `#` comments to end of
//! line):
//!
//! ```text
//! file      := "argument" IDENT "{" element* "}"
//! element   := kind IDENT STRING flag* rel*
//! kind      := "goal" | "strategy" | "solution" | "context"
//!            | "assumption" | "justification"
//! flag      := "undeveloped" | "uninstantiated" | "module" IDENT | "tag" TAG
//! rel       := ("supported_by" | "in_context_of") idlist
//! idlist    := IDENT ("," IDENT)*
//! IDENT     := [A-Za-z][A-Za-z0-9_]*
//! TAG       := IDENT (":" IDENT)*
//! STRING    := '"' (escaped chars)* '"'
//! ```
//!
//! The first `goal` in the file is the root. Strings are UTF-8 with `\"` and
//! `\\` as the only escapes. Parsing is total: every input yields either an
//! argument or at least one positioned [`ParseError`]; semantic problems
//! (unknown relation targets, cycles, orphans) are left to
//! [`crate::model::validate`]. Serialization is canonical: elements are
//! emitted breadth-first from the root with ties broken by identifier, so
//! equal arguments always produce identical bytes.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::{
    is_valid_tag, Argument, Development, Element, ElementId, ElementKind, Instantiation,
    ModelError, Relation, RelationKind, Tag,
};

/// Position of a token in the source text, 1-based, measured in characters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceSpan {
    pub line: u32,
    pub column: u32,
    pub length: u32,
}

/// A syntax problem at a specific token.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("{}:{}: expected {expected}, found {found}", span.line, span.column)]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: String,
    pub found: String,
}

impl ParseError {
    fn new(span: SourceSpan, expected: impl Into<String>, found: impl Into<String>) -> Self {
        ParseError {
            span,
            expected: expected.into(),
            found: found.into(),
        }
    }
}

// ---------------------------------------------------------------------------
// Lexer, shared with the pattern / indicator / milestone line formats
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    Str(String),
    Num(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => alloc::format!("`{s}`"),
            Tok::Str(_) => "string".to_string(),
            Tok::Num(s) => alloc::format!("number `{s}`"),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Eq => "`=`".to_string(),
            Tok::Lt => "`<`".to_string(),
            Tok::Le => "`<=`".to_string(),
            Tok::Gt => "`>`".to_string(),
            Tok::Ge => "`>=`".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Token {
    pub(crate) tok: Tok,
    pub(crate) span: SourceSpan,
}

pub(crate) fn lex(input: &str) -> Result<Vec<Token>, ParseError> {
    let mut tokens = Vec::new();
    let mut chars = input.chars().peekable();
    let mut line = 1u32;
    let mut column = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    column = 1;
                } else {
                    column += 1;
                }
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let start = SourceSpan {
            line,
            column,
            length: 1,
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '{' => {
                bump!();
                tokens.push(Token { tok: Tok::LBrace, span: start });
            }
            '}' => {
                bump!();
                tokens.push(Token { tok: Tok::RBrace, span: start });
            }
            '(' => {
                bump!();
                tokens.push(Token { tok: Tok::LParen, span: start });
            }
            ')' => {
                bump!();
                tokens.push(Token { tok: Tok::RParen, span: start });
            }
            ',' => {
                bump!();
                tokens.push(Token { tok: Tok::Comma, span: start });
            }
            '=' => {
                bump!();
                tokens.push(Token { tok: Tok::Eq, span: start });
            }
            '<' | '>' => {
                bump!();
                let wide = chars.peek() == Some(&'=');
                if wide {
                    bump!();
                }
                let tok = match (c, wide) {
                    ('<', false) => Tok::Lt,
                    ('<', true) => Tok::Le,
                    ('>', false) => Tok::Gt,
                    ('>', true) => Tok::Ge,
                    _ => unreachable!(),
                };
                tokens.push(Token {
                    tok,
                    span: SourceSpan {
                        length: if wide { 2 } else { 1 },
                        ..start
                    },
                });
            }
            '"' => {
                bump!();
                let mut value = String::new();
                let mut length = 1u32;
                loop {
                    match chars.peek() {
                        None => {
                            return Err(ParseError::new(start, "closing `\"`", "end of input"));
                        }
                        Some('\n') | Some('\r') => {
                            return Err(ParseError::new(
                                SourceSpan { line, column, length: 1 },
                                "closing `\"` on the same line",
                                "line break",
                            ));
                        }
                        Some('"') => {
                            bump!();
                            length += 1;
                            break;
                        }
                        Some('\\') => {
                            bump!();
                            length += 1;
                            match chars.peek() {
                                Some('"') => {
                                    bump!();
                                    length += 1;
                                    value.push('"');
                                }
                                Some('\\') => {
                                    bump!();
                                    length += 1;
                                    value.push('\\');
                                }
                                other => {
                                    let found = match other {
                                        Some(c) => alloc::format!("`\\{c}`"),
                                        None => "end of input".to_string(),
                                    };
                                    return Err(ParseError::new(
                                        SourceSpan { line, column: column - 1, length: 2 },
                                        "escape `\\\"` or `\\\\`",
                                        found,
                                    ));
                                }
                            }
                        }
                        Some(&c) if c.is_control() => {
                            return Err(ParseError::new(
                                SourceSpan { line, column, length: 1 },
                                "printable character",
                                "control character",
                            ));
                        }
                        Some(&c) => {
                            bump!();
                            length += 1;
                            value.push(c);
                        }
                    }
                }
                tokens.push(Token {
                    tok: Tok::Str(value),
                    span: SourceSpan { length, ..start },
                });
            }
            c if c.is_ascii_alphabetic() => {
                let mut word = String::new();
                let mut length = 0u32;
                loop {
                    match chars.peek() {
                        Some(&c) if c.is_ascii_alphanumeric() || c == '_' => {
                            bump!();
                            length += 1;
                            word.push(c);
                        }
                        // Colon-joined segment, used by tags like `standard:iso26262`.
                        Some(':') => {
                            let mut lookahead = chars.clone();
                            lookahead.next();
                            match lookahead.peek() {
                                Some(c2) if c2.is_ascii_alphabetic() => {
                                    bump!();
                                    length += 1;
                                    word.push(':');
                                }
                                _ => break,
                            }
                        }
                        _ => break,
                    }
                }
                tokens.push(Token {
                    tok: Tok::Ident(word),
                    span: SourceSpan { length, ..start },
                });
            }
            c if c.is_ascii_digit() || c == '-' => {
                let mut literal = String::new();
                let mut length = 0u32;
                if c == '-' {
                    bump!();
                    length += 1;
                    literal.push('-');
                    if !matches!(chars.peek(), Some(d) if d.is_ascii_digit()) {
                        return Err(ParseError::new(start, "digit after `-`", "`-`"));
                    }
                }
                let mut seen_dot = false;
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() || (c == '.' && !seen_dot) {
                        if c == '.' {
                            seen_dot = true;
                        }
                        bump!();
                        length += 1;
                        literal.push(c);
                    } else {
                        break;
                    }
                }
                tokens.push(Token {
                    tok: Tok::Num(literal),
                    span: SourceSpan { length, ..start },
                });
            }
            other => {
                return Err(ParseError::new(
                    start,
                    "token",
                    alloc::format!("`{other}`"),
                ));
            }
        }
    }
    Ok(tokens)
}

// ---------------------------------------------------------------------------
// Token stream helpers
// ---------------------------------------------------------------------------

pub(crate) struct TokenStream {
    tokens: Vec<Token>,
    pos: usize,
    eof: SourceSpan,
}

impl TokenStream {
    pub(crate) fn new(input: &str) -> Result<Self, ParseError> {
        let tokens = lex(input)?;
        let eof = match tokens.last() {
            Some(last) => SourceSpan {
                line: last.span.line,
                column: last.span.column + last.span.length,
                length: 1,
            },
            None => SourceSpan { line: 1, column: 1, length: 1 },
        };
        Ok(TokenStream { tokens, pos: 0, eof })
    }

    pub(crate) fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    pub(crate) fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    pub(crate) fn advance(&mut self) -> Option<Token> {
        let token = self.tokens.get(self.pos).cloned();
        if token.is_some() {
            self.pos += 1;
        }
        token
    }

    pub(crate) fn error_here(&self, expected: impl Into<String>) -> ParseError {
        match self.peek() {
            Some(token) => ParseError::new(token.span, expected, token.tok.describe()),
            None => ParseError::new(self.eof, expected, "end of input"),
        }
    }

    /// True and consumed if the next token is the given bare word.
    pub(crate) fn eat_keyword(&mut self, word: &str) -> bool {
        if matches!(self.peek(), Some(Token { tok: Tok::Ident(w), .. }) if w == word) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    pub(crate) fn peek_keyword(&self, word: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Ident(w), .. }) if w == word)
    }

    pub(crate) fn expect_keyword(&mut self, word: &str) -> Result<(), ParseError> {
        if self.eat_keyword(word) {
            Ok(())
        } else {
            Err(self.error_here(alloc::format!("`{word}`")))
        }
    }

    pub(crate) fn expect_tok(&mut self, tok: Tok, what: &str) -> Result<SourceSpan, ParseError> {
        match self.peek() {
            Some(token) if token.tok == tok => {
                let span = token.span;
                self.pos += 1;
                Ok(span)
            }
            _ => Err(self.error_here(what)),
        }
    }

    /// Any identifier-shaped word plus its span.
    pub(crate) fn expect_word(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Ident(w), span }) => {
                let out = (w.clone(), *span);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.error_here(what)),
        }
    }

    pub(crate) fn expect_element_id(&mut self, what: &str) -> Result<(ElementId, SourceSpan), ParseError> {
        let (word, span) = self.expect_word(what)?;
        match ElementId::new(word) {
            Ok(id) => Ok((id, span)),
            Err(err) => Err(ParseError::new(span, what, alloc::format!("`{}`", err.literal))),
        }
    }

    pub(crate) fn expect_string(&mut self, what: &str) -> Result<(String, SourceSpan), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Str(s), span }) => {
                let out = (s.clone(), *span);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.error_here(what)),
        }
    }

    pub(crate) fn expect_integer(&mut self, what: &str) -> Result<(u32, SourceSpan), ParseError> {
        match self.peek() {
            Some(Token { tok: Tok::Num(n), span }) => {
                let span = *span;
                match n.parse::<u32>() {
                    Ok(value) => {
                        self.pos += 1;
                        Ok((value, span))
                    }
                    Err(_) => Err(ParseError::new(span, what, alloc::format!("`{n}`"))),
                }
            }
            _ => Err(self.error_here(what)),
        }
    }
}

// ---------------------------------------------------------------------------
// Argument file parsing
// ---------------------------------------------------------------------------

/// One parsed element together with the relations it declares. The pattern
/// parser reuses this and additionally captures `optional` flags and `many`
/// multiplicities.
pub(crate) struct RawElement {
    pub(crate) element: Element,
    pub(crate) relations: Vec<Relation>,
    pub(crate) many: Vec<(Relation, u32, Option<u32>)>,
    pub(crate) optional: bool,
    pub(crate) id_span: SourceSpan,
}

pub(crate) struct FileSyntax {
    pub(crate) keyword: &'static str,
    pub(crate) pattern_extensions: bool,
}

pub(crate) const ARGUMENT_SYNTAX: FileSyntax = FileSyntax {
    keyword: "argument",
    pattern_extensions: false,
};

fn is_kind_keyword(stream: &TokenStream) -> bool {
    matches!(
        stream.peek(),
        Some(Token { tok: Tok::Ident(w), .. }) if ElementKind::from_keyword(w).is_some()
    )
}

fn parse_element(stream: &mut TokenStream, syntax: &FileSyntax) -> Result<RawElement, ParseError> {
    let (kind_word, _) = stream.expect_word("element keyword")?;
    let kind = match ElementKind::from_keyword(&kind_word) {
        Some(kind) => kind,
        None => return Err(stream.error_here("element keyword")),
    };
    let (id, id_span) = stream.expect_element_id("element identifier")?;
    let (statement, _) = stream.expect_string("quoted statement")?;

    let mut element = Element::new(id, kind, statement);
    let mut optional = false;

    // Flags.
    loop {
        if stream.eat_keyword("undeveloped") {
            element.development = Development::Undeveloped;
        } else if stream.eat_keyword("uninstantiated") {
            element.instantiation = Instantiation::Uninstantiated;
        } else if stream.peek_keyword("module") {
            stream.advance();
            let (word, _) = stream.expect_word("module name")?;
            element.module_name = Some(word);
        } else if stream.peek_keyword("tag") {
            stream.advance();
            let (word, span) = stream.expect_word("tag")?;
            if !is_valid_tag(&word) {
                return Err(ParseError::new(span, "tag", alloc::format!("`{word}`")));
            }
            element.tags.insert(Tag::new(word).expect("checked tag"));
        } else if syntax.pattern_extensions && stream.eat_keyword("optional") {
            optional = true;
        } else {
            break;
        }
    }

    // Relations.
    let mut relations = Vec::new();
    let mut many = Vec::new();
    loop {
        let kind = if stream.peek_keyword("supported_by") {
            RelationKind::SupportedBy
        } else if stream.peek_keyword("in_context_of") {
            RelationKind::InContextOf
        } else {
            break;
        };
        stream.advance();

        if syntax.pattern_extensions
            && kind == RelationKind::SupportedBy
            && stream.eat_keyword("many")
        {
            let (target, _) = stream.expect_element_id("multiplicity target identifier")?;
            stream.expect_keyword("min")?;
            stream.expect_tok(Tok::Eq, "`=`")?;
            let (min, _) = stream.expect_integer("minimum count")?;
            let mut max = None;
            if stream.eat_keyword("max") {
                stream.expect_tok(Tok::Eq, "`=`")?;
                let (value, span) = stream.expect_integer("maximum count")?;
                if value < min {
                    return Err(ParseError::new(
                        span,
                        alloc::format!("maximum of at least {min}"),
                        alloc::format!("`{value}`"),
                    ));
                }
                max = Some(value);
            }
            let relation = Relation {
                source: element.id.clone(),
                target,
                kind,
            };
            many.push((relation, min, max));
            continue;
        }

        loop {
            let (target, _) = stream.expect_element_id("relation target identifier")?;
            relations.push(Relation {
                source: element.id.clone(),
                target,
                kind,
            });
            if stream.expect_tok(Tok::Comma, "`,`").is_err() {
                break;
            }
        }
    }

    Ok(RawElement {
        element,
        relations,
        many,
        optional,
        id_span,
    })
}

/// Skips tokens until the next plausible element start or closing brace so
/// that one malformed element does not hide errors in the rest of the file.
fn synchronize(stream: &mut TokenStream) {
    while !stream.at_end() {
        if is_kind_keyword(stream) || matches!(stream.peek(), Some(Token { tok: Tok::RBrace, .. })) {
            return;
        }
        stream.advance();
    }
}

pub(crate) struct ParsedFile {
    pub(crate) name: String,
    pub(crate) raw_elements: Vec<RawElement>,
}

pub(crate) fn parse_file(text: &str, syntax: &FileSyntax) -> Result<ParsedFile, Vec<ParseError>> {
    let mut stream = match TokenStream::new(text) {
        Ok(stream) => stream,
        Err(err) => return Err(alloc::vec![err]),
    };
    let mut errors = Vec::new();

    // The pattern dialect accepts both introducers so plain argument files
    // can be promoted to patterns without rewriting.
    let intro_ok = if syntax.pattern_extensions {
        stream.eat_keyword(syntax.keyword) || stream.eat_keyword(ARGUMENT_SYNTAX.keyword)
    } else {
        stream.eat_keyword(syntax.keyword)
    };
    if !intro_ok {
        return Err(alloc::vec![stream.error_here(alloc::format!("`{}`", syntax.keyword))]);
    }
    let name = match stream.expect_word("name identifier") {
        Ok((word, span)) => {
            if crate::model::is_valid_ident(&word) {
                word
            } else {
                return Err(alloc::vec![ParseError::new(
                    span,
                    "name identifier",
                    alloc::format!("`{word}`"),
                )]);
            }
        }
        Err(err) => return Err(alloc::vec![err]),
    };
    if let Err(err) = stream.expect_tok(Tok::LBrace, "`{`") {
        return Err(alloc::vec![err]);
    }

    let mut raw_elements: Vec<RawElement> = Vec::new();
    let mut seen: BTreeSet<ElementId> = BTreeSet::new();
    loop {
        if stream.at_end() {
            errors.push(stream.error_here("`}`"));
            break;
        }
        if stream.expect_tok(Tok::RBrace, "`}`").is_ok() {
            break;
        }
        if !is_kind_keyword(&stream) {
            errors.push(stream.error_here("element keyword or `}`"));
            synchronize(&mut stream);
            continue;
        }
        match parse_element(&mut stream, syntax) {
            Ok(raw) => {
                if seen.contains(&raw.element.id) {
                    errors.push(ParseError::new(
                        raw.id_span,
                        "unique identifier",
                        alloc::format!("duplicate identifier {}", raw.element.id),
                    ));
                } else {
                    seen.insert(raw.element.id.clone());
                    raw_elements.push(raw);
                }
            }
            Err(err) => {
                errors.push(err);
                synchronize(&mut stream);
            }
        }
    }
    if !stream.at_end() {
        errors.push(stream.error_here("end of input"));
    }

    if errors.is_empty() {
        Ok(ParsedFile { name, raw_elements })
    } else {
        Err(errors)
    }
}

pub(crate) fn assemble_argument(file: ParsedFile) -> Result<Argument, Vec<ParseError>> {
    let root = match file
        .raw_elements
        .iter()
        .find(|raw| raw.element.kind == ElementKind::Goal)
    {
        Some(raw) => raw.element.id.clone(),
        None => {
            return Err(alloc::vec![ParseError::new(
                SourceSpan { line: 1, column: 1, length: 1 },
                "at least one goal element",
                "none",
            )])
        }
    };
    let mut elements = alloc::collections::BTreeMap::new();
    let mut relations = BTreeSet::new();
    for raw in file.raw_elements {
        relations.extend(raw.relations);
        elements.insert(raw.element.id.clone(), raw.element);
    }
    Ok(Argument {
        name: file.name,
        elements,
        relations,
        root,
    })
}

/// Parses a `.gsn` argument file. Returns every syntax error found; semantic
/// validation is a separate step.
pub fn parse_argument(text: &str) -> Result<Argument, Vec<ParseError>> {
    let file = parse_file(text, &ARGUMENT_SYNTAX)?;
    assemble_argument(file)
}

// ---------------------------------------------------------------------------
// Canonical serialization
// ---------------------------------------------------------------------------

pub(crate) fn escape_statement(statement: &str) -> String {
    let mut out = String::with_capacity(statement.len() + 2);
    for c in statement.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            other => out.push(other),
        }
    }
    out
}

/// Breadth-first element order from the root, following both relation kinds,
/// ties broken by identifier. Elements unreachable from the root (possible in
/// pattern fragments that reference foreign ids) are appended in id order.
pub(crate) fn canonical_order(argument: &Argument) -> Vec<ElementId> {
    let mut order = Vec::with_capacity(argument.elements.len());
    let mut visited = BTreeSet::new();
    let mut queue = alloc::collections::VecDeque::new();
    if argument.contains(&argument.root) {
        visited.insert(argument.root.clone());
        queue.push_back(argument.root.clone());
    }
    while let Some(current) = queue.pop_front() {
        order.push(current.clone());
        let mut children: Vec<&ElementId> = argument
            .relations
            .iter()
            .filter(|r| r.source == current)
            .map(|r| &r.target)
            .filter(|t| argument.contains(t))
            .collect();
        children.sort();
        children.dedup();
        for child in children {
            if visited.insert(child.clone()) {
                queue.push_back(child.clone());
            }
        }
    }
    for id in argument.elements.keys() {
        if !visited.contains(id) {
            order.push(id.clone());
        }
    }
    order
}

pub(crate) fn write_element_line(
    out: &mut String,
    argument: &Argument,
    element: &Element,
    optional: bool,
    many: &[(Relation, u32, Option<u32>)],
) {
    let _ = write!(
        out,
        "  {} {} \"{}\"",
        element.kind.keyword(),
        element.id,
        escape_statement(&element.statement)
    );
    if element.development == Development::Undeveloped {
        out.push_str(" undeveloped");
    }
    if element.instantiation == Instantiation::Uninstantiated {
        out.push_str(" uninstantiated");
    }
    if optional {
        out.push_str(" optional");
    }
    if let Some(module) = &element.module_name {
        let _ = write!(out, " module {module}");
    }
    for tag in &element.tags {
        let _ = write!(out, " tag {tag}");
    }

    let many_relations: BTreeSet<&Relation> = many.iter().map(|(r, _, _)| r).collect();
    for kind in [RelationKind::SupportedBy, RelationKind::InContextOf] {
        let targets: Vec<&ElementId> = argument
            .relations
            .iter()
            .filter(|r| r.kind == kind && r.source == element.id && !many_relations.contains(r))
            .map(|r| &r.target)
            .collect();
        if !targets.is_empty() {
            let _ = write!(out, " {} ", kind.keyword());
            for (i, target) in targets.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{target}");
            }
        }
        if kind == RelationKind::SupportedBy {
            let mut manys: Vec<&(Relation, u32, Option<u32>)> = many
                .iter()
                .filter(|(r, _, _)| r.source == element.id)
                .collect();
            manys.sort_by(|a, b| a.0.cmp(&b.0));
            for (relation, min, max) in manys {
                let _ = write!(out, " supported_by many {} min={min}", relation.target);
                if let Some(max) = max {
                    let _ = write!(out, " max={max}");
                }
            }
        }
    }
    out.push('\n');
}

/// Canonical text form of a well-formed argument. Parsing the result yields
/// an argument equal to the input; serializing again is byte-identical.
pub fn serialize_argument(argument: &Argument) -> Result<String, ModelError> {
    crate::model::require_valid(argument)?;
    let mut out = String::new();
    let _ = writeln!(out, "argument {} {{", argument.name);
    for id in canonical_order(argument) {
        let element = &argument.elements[&id];
        write_element_line(&mut out, argument, element, false, &[]);
    }
    out.push_str("}\n");
    Ok(out)
}
