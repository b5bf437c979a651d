//! Ballot files: CSV with header `voter_id,ballot[,weight]`.

use std::path::Path;

use super::CliError;
use crate::domain::{AlternativeDomain, Ballot, Profile, VoterId, Weights};

pub const HEADER: &str = "voter_id,ballot";
pub const WEIGHTED_HEADER: &str = "voter_id,ballot,weight";
pub const ABSTAIN: &str = "abstain";

/// Parsed ballot file.
#[derive(Debug, Clone)]
pub struct BallotFile {
    pub profile: Profile,
    pub weights: Option<Weights>,
}

pub fn read_ballots(path: &Path, domain: &AlternativeDomain) -> Result<BallotFile, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let text = String::from_utf8(bytes).map_err(|_| CliError::Parse(format!("{}: not UTF-8", path.display())))?;
    parse_ballots(&text, domain).map_err(|e| match e {
        CliError::Parse(m) => CliError::Parse(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// Parses ballot CSV text; an empty text is an empty electorate.
pub fn parse_ballots(text: &str, domain: &AlternativeDomain) -> Result<BallotFile, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(text.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        None => {
            return Ok(BallotFile {
                profile: Profile::from_ballots(Vec::new())?,
                weights: None,
            })
        }
        Some(h) => h.map_err(|e| CliError::Parse(format!("header: {e}")))?,
    };
    let joined = header.iter().collect::<Vec<_>>().join(",");
    let weighted = match joined.as_str() {
        HEADER => false,
        WEIGHTED_HEADER => true,
        other => {
            return Err(CliError::Parse(format!(
                "header must be `{HEADER}` or `{WEIGHTED_HEADER}`, got `{other}`"
            )))
        }
    };
    let columns = if weighted { 3 } else { 2 };
    let mut entries = Vec::new();
    let mut weights = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, rec) in records.enumerate() {
        let row = i + 2;
        let rec = rec.map_err(|e| CliError::Parse(format!("row {row}: {e}")))?;
        if rec.len() != columns {
            return Err(CliError::Parse(format!("row {row}: expected {columns} fields, got {}", rec.len())));
        }
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(CliError::Parse(format!("row {row}: empty voter id")));
        }
        if !seen.insert(id.clone()) {
            return Err(CliError::Parse(format!("row {row}: duplicate voter id `{id}`")));
        }
        let ballot = match rec[1].trim() {
            ABSTAIN => Ballot::Abstain,
            s => {
                let v: f64 = s
                    .parse()
                    .map_err(|_| CliError::Parse(format!("row {row}: ballot `{s}` is neither a decimal nor `{ABSTAIN}`")))?;
                if !v.is_finite() || !domain.contains(v) {
                    return Err(CliError::Parse(format!(
                        "row {row}: ballot {v} of voter `{id}` lies outside [{}, {}]",
                        domain.mu_minus(),
                        domain.mu_plus()
                    )));
                }
                Ballot::Peak(v)
            }
        };
        if weighted {
            let s = rec[2].trim();
            let w: f64 = s
                .parse()
                .map_err(|_| CliError::Parse(format!("row {row}: weight `{s}` is not a decimal")))?;
            if !(w.is_finite() && w >= 0.0) {
                return Err(CliError::Parse(format!("row {row}: weight {w} is negative or not finite")));
            }
            weights.push(w);
        }
        entries.push((VoterId(id), ballot));
    }
    let profile = Profile::new(entries)?;
    let weights = if weighted { Some(Weights::new(weights)?) } else { None };
    Ok(BallotFile { profile, weights })
}

/// CSV for a list of peaks, voters named `1..=n`.
pub fn format_peaks(peaks: &[f64]) -> String {
    let mut out = String::with_capacity(16 * (peaks.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for (i, p) in peaks.iter().enumerate() {
        out.push_str(&format!("{},{p}\n", i + 1));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> AlternativeDomain {
        AlternativeDomain::unit()
    }

    #[test]
    fn plain_and_weighted_files() {
        let f = parse_ballots("voter_id,ballot\na,0.3\nb,abstain\n", &unit()).unwrap();
        assert_eq!(f.profile.len(), 2);
        assert_eq!(f.profile.ballots()[1], Ballot::Abstain);
        assert!(f.weights.is_none());
        let f = parse_ballots("voter_id,ballot,weight\na,0.3,2\nb,0.9,1\n", &unit()).unwrap();
        assert_eq!(f.weights.unwrap().values(), &[2.0, 1.0]);
    }

    #[test]
    fn empty_files_are_empty_electorates() {
        assert!(parse_ballots("", &unit()).unwrap().profile.is_empty());
        assert!(parse_ballots("voter_id,ballot\n", &unit()).unwrap().profile.is_empty());
    }

    #[test]
    fn errors_name_the_row() {
        let err = parse_ballots("voter_id,ballot\na,0.3\nb,1.5\n", &unit()).unwrap_err();
        assert!(err.to_string().contains("row 3"), "{err}");
        let err = parse_ballots("voter_id,ballot\na,0.3\na,0.5\n", &unit()).unwrap_err();
        assert!(err.to_string().contains("duplicate"), "{err}");
        assert!(parse_ballots("id,ballot\na,0.3\n", &unit()).is_err());
        assert!(parse_ballots("voter_id,ballot,weight\na,0.3,-1\n", &unit()).is_err());
        assert!(parse_ballots("voter_id,ballot\na,x\n", &unit()).is_err());
    }

    #[test]
    fn formatted_peaks_parse_back() {
        let text = format_peaks(&[0.25, 1.0]);
        let f = parse_ballots(&text, &unit()).unwrap();
        assert_eq!(f.profile.peaks().unwrap(), vec![0.25, 1.0]);
    }
}
