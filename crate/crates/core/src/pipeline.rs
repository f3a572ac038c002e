//! The full checking pipeline: parse, sanity, types, signature sets, sorts,
//! annotations. Each stage runs only if the previous one succeeded.

use std::fmt;

use crate::annotated::check_program_annotations;
use crate::ast::{Diagnostic, Program};
use crate::parser::parse_sources;
use crate::registry::{SensorCatalog, SignatureRegistry};
use crate::sortcheck::{check_program_sorts, Derivation};
use crate::typecheck::{check_program_types, check_sanity};
use crate::validate::validate_signature_sets;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    ParseError,
    Insane,
    IllTyped,
    BadSignatures,
    NotWellSorted,
    NotWellAnnotated,
    WellAnnotated,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ParseError => "parse error",
            Verdict::Insane => "malformed program",
            Verdict::IllTyped => "not well typed",
            Verdict::BadSignatures => "ill-formed signature sets",
            Verdict::NotWellSorted => "not well sorted",
            Verdict::NotWellAnnotated => "not well annotated",
            Verdict::WellAnnotated => "well annotated",
        })
    }
}

pub struct CheckReport {
    pub verdict: Verdict,
    pub diagnostics: Vec<Diagnostic>,
    pub program: Program,
    /// `(function, signature, derivation)` for every accepted signature.
    pub derivations: Vec<(String, String, Derivation)>,
}

impl CheckReport {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.is_error())
    }
}

pub fn check_program(program: Program, sensors: SensorCatalog, library: bool) -> CheckReport {
    let reg = SignatureRegistry::new(&program, sensors);
    let mut diagnostics = Vec::new();
    let mut derivations = Vec::new();
    let stage = |verdict: Verdict, diags: Vec<Diagnostic>, all: &mut Vec<Diagnostic>| {
        let failed = diags.iter().any(Diagnostic::is_error);
        all.extend(diags);
        failed.then_some(verdict)
    };
    let verdict = (|| {
        if let Some(v) = stage(Verdict::Insane, check_sanity(&program, &reg, library), &mut diagnostics) {
            return v;
        }
        if let Some(v) = stage(Verdict::IllTyped, check_program_types(&program, &reg), &mut diagnostics) {
            return v;
        }
        if let Some(v) = stage(Verdict::BadSignatures, validate_signature_sets(&program, &reg), &mut diagnostics) {
            return v;
        }
        let sorts = check_program_sorts(&program, &reg);
        for d in &sorts.defs {
            for (sig, der) in &d.derivations {
                derivations.push((d.name.clone(), sig.to_string(), der.clone()));
            }
        }
        diagnostics.extend(sorts.warnings);
        if let Some(v) = stage(Verdict::NotWellSorted, sorts.errors, &mut diagnostics) {
            return v;
        }
        let ann = check_program_annotations(&program, &reg);
        for (name, sig, der) in ann.derivations {
            derivations.push((name, sig.to_string(), der));
        }
        if let Some(v) = stage(Verdict::NotWellAnnotated, ann.errors, &mut diagnostics) {
            return v;
        }
        Verdict::WellAnnotated
    })();
    CheckReport { verdict, diagnostics, program, derivations }
}

/// Parse and check source units.
pub fn check_sources(units: &[(&str, &str)], sensors: SensorCatalog, library: bool) -> CheckReport {
    let (program, diags) = parse_sources(units);
    if diags.iter().any(Diagnostic::is_error) {
        return CheckReport { verdict: Verdict::ParseError, diagnostics: diags, program, derivations: vec![] };
    }
    let mut report = check_program(program, sensors, library);
    let mut all = diags;
    all.append(&mut report.diagnostics);
    report.diagnostics = all;
    report
}
