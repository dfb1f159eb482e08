//! Roll import: one `V_id` and display name per line.

use std::collections::HashSet;

use trip_ledger::RollEntry;

use crate::CliError;

/// Parses `text`. Blank lines and lines starting with `#` are skipped; the
/// first whitespace separates the id from the name.
pub fn parse_roll(text: &str) -> Result<Vec<RollEntry>, CliError> {
    let mut seen = HashSet::new();
    let mut roll = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (v_id, name) = match line.split_once(char::is_whitespace) {
            Some((id, name)) if !name.trim().is_empty() => (id, name.trim()),
            _ => return Err(CliError::Usage(format!("roll line {}: expected `V_id display name`", n + 1))),
        };
        if !seen.insert(v_id.to_owned()) {
            return Err(CliError::Usage(format!("roll line {}: duplicate V_id {v_id}", n + 1)));
        }
        roll.push(RollEntry { v_id: v_id.to_owned(), name: name.to_owned() });
    }
    if roll.is_empty() {
        return Err(CliError::Usage("roll is empty".into()));
    }
    Ok(roll)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ids_and_names() {
        let roll = parse_roll("# county 7\nv001 Ada Lovelace\n\n  v002\tGrace  Hopper \n").unwrap();
        assert_eq!(roll.len(), 2);
        assert_eq!(roll[0], RollEntry { v_id: "v001".into(), name: "Ada Lovelace".into() });
        assert_eq!(roll[1].name, "Grace  Hopper");
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(parse_roll("v001\n").is_err());
        assert!(parse_roll("v1 A\nv1 B\n").is_err());
        assert!(parse_roll("# nothing\n").is_err());
    }
}
