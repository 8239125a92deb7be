//! `key=value` config files. Each key names a long flag of the chosen
//! subcommand; flags given on the command line win.

use std::path::Path;

use wordlink::{Error, Result};

/// Subcommands, with their nested subcommands.
const COMMANDS: [(&str, &[&str]); 5] = [
    ("train", &[]),
    ("evaluate", &[]),
    ("lexicon", &[]),
    ("analyze", &["singletons", "multi-rare", "link-ratio-histogram"]),
    ("synth", &[]),
];

/// Turns config lines into flags. `true` and `false` switch boolean flags
/// on and off; everything else is passed as the flag's value.
pub fn parse(text: &str, origin: &str) -> Result<Vec<String>> {
    let mut args = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Format {
            path: origin.to_string(),
            line: i + 1,
            message: "expected key=value".into(),
        })?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        match value {
            "true" => args.push(format!("--{key}")),
            "false" => {}
            _ => {
                args.push(format!("--{key}"));
                args.push(value.to_string());
            }
        }
    }
    Ok(args)
}

/// Path given with `--config`, if any.
fn config_path(argv: &[String]) -> Option<&str> {
    argv.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            argv.get(i + 1).map(String::as_str)
        } else {
            a.strip_prefix("--config=")
        }
    })
}

/// Position right after the (innermost) subcommand name.
fn insertion_point(argv: &[String]) -> usize {
    let Some((i, nested)) = argv
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| COMMANDS.iter().find(|(c, _)| c == a).map(|(_, n)| (i, *n)))
    else {
        return argv.len();
    };
    argv.iter()
        .enumerate()
        .skip(i + 1)
        .find(|(_, a)| nested.contains(&a.as_str()))
        .map_or(i + 1, |(j, _)| j + 1)
}

/// Splices the config file's flags in front of the command-line flags, so
/// that later (command-line) occurrences override them.
pub fn merge(argv: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(Path::new(path), e))?;
    let extra = parse(&text, path)?;
    let at = insertion_point(&argv);
    let mut out = argv;
    out.splice(at..at, extra);
    Ok(out)
}
