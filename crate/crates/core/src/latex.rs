//! Removal of LaTeX markup from pasted reference text.
//!
//! Commands fall into two classes. Spacing and layout commands
//! (`\vspace{2mm}`, `\noindent`, ...) are dropped together with their
//! arguments. Everything else, including unknown macros, loses only the
//! command token so that wrapped text such as `\textit{Deep Learning}`
//! survives as `Deep Learning`.
//!
//! Input without a single backslash is not treated as LaTeX; only its
//! whitespace is normalized.

/// Commands removed along with one brace argument (and an optional `[...]`).
const DROP_WITH_ARG: &[&str] = &["vspace", "hspace", "label", "addvspace"];

/// Commands removed along with an optional TeX dimension (`\vskip 2mm`).
const DROP_WITH_DIMEN: &[&str] = &["vskip", "hskip", "kern"];

/// Argument-less layout commands. They separate words, so they leave a space.
const DROP_BARE: &[&str] = &[
    "newline",
    "noindent",
    "linebreak",
    "par",
    "smallskip",
    "medskip",
    "bigskip",
    "newpage",
    "clearpage",
    "centering",
    "hfill",
    "vfill",
    "quad",
    "qquad",
    "indent",
];

/// Commands that expand to literal text.
const LITERALS: &[(&str, &str)] = &[
    ("LaTeX", "LaTeX"),
    ("TeX", "TeX"),
    ("ss", "ß"),
    ("o", "ø"),
    ("O", "Ø"),
    ("ae", "æ"),
    ("AE", "Æ"),
    ("oe", "œ"),
    ("OE", "Œ"),
    ("aa", "å"),
    ("AA", "Å"),
    ("l", "ł"),
    ("L", "Ł"),
    ("i", "i"),
    ("j", "j"),
    ("ldots", "..."),
    ("dots", "..."),
    ("textendash", "–"),
    ("textemdash", "—"),
    ("textquoteright", "’"),
    ("textquoteleft", "‘"),
    ("textasciitilde", "~"),
    ("textunderscore", "_"),
];

const DIMEN_UNITS: &[&str] = &["pt", "mm", "cm", "in", "em", "ex", "bp", "sp", "pc", "dd", "cc", "mu"];

/// Strips LaTeX commands, comments and grouping braces, then collapses
/// whitespace to single spaces and trims.
///
/// Text inside `$...$` keeps its braces; only commands are handled there.
/// Unbalanced arguments never fail: the command token is dropped and the
/// rest of the text is kept.
pub fn filter_latex(input: &str) -> String {
    if !input.contains('\\') {
        return collapse_whitespace(input);
    }
    let mut filter = Filter {
        chars: input.chars().collect(),
        pos: 0,
        out: String::with_capacity(input.len()),
        in_math: false,
    };
    filter.run();
    collapse_whitespace(&filter.out)
}

/// Collapses whitespace runs (including newlines) to one space and trims.
pub fn collapse_whitespace(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

struct Filter {
    chars: Vec<char>,
    pos: usize,
    out: String,
    in_math: bool,
}

impl Filter {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn run(&mut self) {
        while let Some(c) = self.peek() {
            self.pos += 1;
            match c {
                '\\' => self.command(),
                '%' => self.skip_comment(),
                '$' => {
                    self.in_math = !self.in_math;
                    self.out.push('$');
                }
                '{' | '}' if !self.in_math => {}
                '~' if !self.in_math => self.out.push(' '),
                _ => self.out.push(c),
            }
        }
    }

    fn skip_comment(&mut self) {
        while let Some(c) = self.peek() {
            if c == '\n' {
                break;
            }
            self.pos += 1;
        }
        self.out.push(' ');
    }

    /// Called with `pos` just past the backslash.
    fn command(&mut self) {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_alphabetic()) {
            self.pos += 1;
        }
        if self.pos == start {
            self.control_symbol();
            return;
        }
        let name: String = self.chars[start..self.pos].iter().collect();
        if self.peek() == Some('*') {
            self.pos += 1;
        }

        if DROP_WITH_ARG.contains(&name.as_str()) {
            let rewind = self.pos;
            self.skip_whitespace();
            self.skip_bracket_group();
            self.skip_whitespace();
            if !self.skip_brace_group() {
                // unbalanced or missing argument: drop only the token
                self.pos = rewind;
            }
            self.out.push(' ');
        } else if DROP_WITH_DIMEN.contains(&name.as_str()) {
            self.skip_whitespace();
            if !self.skip_brace_group() {
                self.skip_dimension();
            }
            self.out.push(' ');
        } else if DROP_BARE.contains(&name.as_str()) {
            self.out.push(' ');
        } else if let Some((_, text)) = LITERALS.iter().find(|(n, _)| *n == name) {
            self.out.push_str(text);
            // `\ss{}` style terminators
            if self.peek() == Some('{') && self.peek_at(1) == Some('}') {
                self.pos += 2;
            } else if text.chars().count() == 1 && text.chars().all(char::is_alphabetic) {
                // like TeX, `\ss e` spells one word
                self.skip_whitespace();
            }
        }
        // anything else (content-preserving or unknown): the token is simply
        // dropped and the argument text flows through
    }

    fn control_symbol(&mut self) {
        let Some(c) = self.peek() else {
            return;
        };
        self.pos += 1;
        match c {
            '\\' => {
                if self.peek() == Some('*') {
                    self.pos += 1;
                }
                self.skip_bracket_group();
                self.out.push(' ');
            }
            '%' | '&' | '$' | '#' | '_' | '{' | '}' => self.out.push(c),
            ' ' | ',' | ';' | ':' | '!' | '>' | '\n' | '\t' => self.out.push(' '),
            '\'' | '`' | '^' | '"' | '~' | '=' | '.' => self.accent(c),
            '-' | '/' | '@' => {}
            _ if c.is_ascii() => {}
            // non-ASCII after a backslash is almost certainly content
            _ => self.out.push(c),
        }
    }

    /// Handles `\'e`, `\'{e}` and `\"{o}`; drops the accent when the base
    /// letter cannot be combined.
    fn accent(&mut self, accent: char) {
        let (base, consumed) = match (self.peek(), self.peek_at(1), self.peek_at(2)) {
            (Some('{'), Some(b), Some('}')) if b.is_ascii_alphabetic() => (Some(b), 3),
            (Some(b), _, _) if b.is_ascii_alphabetic() => (Some(b), 1),
            _ => (None, 0),
        };
        if let Some(composed) = base.and_then(|b| compose_accent(accent, b)) {
            self.pos += consumed;
            self.out.push(composed);
        }
    }

    fn skip_whitespace(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    /// Skips a balanced `{...}` group. Leaves `pos` unchanged and returns
    /// false when there is no group or it never closes.
    fn skip_brace_group(&mut self) -> bool {
        self.skip_balanced('{', '}')
    }

    fn skip_bracket_group(&mut self) -> bool {
        self.skip_balanced('[', ']')
    }

    fn skip_balanced(&mut self, open: char, close: char) -> bool {
        if self.peek() != Some(open) {
            return false;
        }
        let mut depth = 0usize;
        let mut i = self.pos;
        while let Some(&c) = self.chars.get(i) {
            if c == '\\' {
                i += 2;
                continue;
            }
            if c == open {
                depth += 1;
            } else if c == close {
                depth -= 1;
                if depth == 0 {
                    self.pos = i + 1;
                    return true;
                }
            }
            i += 1;
        }
        false
    }

    /// Skips `[-+]?digits[.digits] unit`, restoring `pos` if no unit follows.
    fn skip_dimension(&mut self) {
        let start = self.pos;
        if matches!(self.peek(), Some('-' | '+')) {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return;
        }
        self.skip_whitespace();
        let unit: String = (0..2).filter_map(|k| self.peek_at(k)).collect();
        if DIMEN_UNITS.contains(&unit.as_str()) {
            self.pos += 2;
        } else {
            self.pos = start;
        }
    }
}

fn compose_accent(accent: char, base: char) -> Option<char> {
    let table: &str = match accent {
        '\'' => "aáeéiíoóuúyýAÁEÉIÍOÓUÚYÝcćnńsśzźCĆNŃSŚZŹ",
        '`' => "aàeèiìoòuùAÀEÈIÌOÒUÙ",
        '^' => "aâeêiîoôuûAÂEÊIÎOÔUÛ",
        '"' => "aäeëiïoöuüyÿAÄEËIÏOÖUÜ",
        '~' => "aãnñoõAÃNÑOÕ",
        _ => return None,
    };
    let chars: Vec<char> = table.chars().collect();
    chars
        .chunks(2)
        .find(|pair| pair[0] == base)
        .map(|pair| pair[1])
}
