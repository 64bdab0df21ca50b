use std::io::IsTerminal;

fn enabled() -> bool {
    std::env::var_os("DCR_NO_COLOR").is_none_or(|v| v != "1") && std::io::stderr().is_terminal()
}

fn paint(code: &str, text: &str) -> String {
    if enabled() {
        format!("\x1b[{code}m{text}\x1b[0m")
    } else {
        text.to_string()
    }
}

pub fn error(text: &str) -> String {
    paint("1;31", text)
}

pub fn warning(text: &str) -> String {
    paint("1;33", text)
}
