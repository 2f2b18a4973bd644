//! The sharing-expression algebra.
//!
//! Tenants state who may co-reside with them on a component instance using
//! four expression forms:
//!
//! * `SWAny` — share with anyone (the default when nothing is declared);
//! * `SWJ(X)` — share with just `X`;
//! * `DSW(X)` — don't share with `X`;
//! * `DSWAny` — don't share with anyone;
//!
//! where `X` is a comma-separated list of `P` (the declarer's partners),
//! `Cp` (its competitors), or specific tenant ids.
//!
//! Every expression resolves to an [`AllowedSet`]: the set of tenants the
//! declarer permits. Colliding expressions on the same cell are folded with
//! [`combine`], which intersects allowed sets. Intersection reproduces the
//! whole transition-rule table — `SWAny` is neutral, `DSWAny` absorbs,
//! `DSW(X) ∩ DSW(Y) = DSW(X ∪ Y)`, disjoint `SWJ`s annihilate — and is the
//! unique commutative, associative extension of those rules, so cells can be
//! folded in any order. Empty results normalize to `DSWAny`, full results to
//! `SWAny`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::model::{TenantId, TenantRegistry, TenantSet};

/// A target inside `SWJ(..)` / `DSW(..)`, before resolution against the
/// declarer's relations.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum SymbolicRef {
    /// `P`: the declarer's partners.
    Partners,
    /// `Cp`: the declarer's competitors.
    Competitors,
    /// A specific tenant id.
    Specific(TenantId),
}

impl fmt::Display for SymbolicRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolicRef::Partners => f.write_str("P"),
            SymbolicRef::Competitors => f.write_str("Cp"),
            SymbolicRef::Specific(id) => write!(f, "{id}"),
        }
    }
}

/// A parsed sharing expression. `SWJ`/`DSW` carry at least one target; empty
/// target lists are rejected at parse time and only arise internally through
/// resolution, where they normalize away.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SharingExpression {
    ShareWithAny,
    ShareWithJust(BTreeSet<SymbolicRef>),
    DontShareWith(BTreeSet<SymbolicRef>),
    DontShareWithAny,
}

impl SharingExpression {
    /// Targets of `SWJ`/`DSW`; empty for the two nullary forms.
    pub fn targets(&self) -> impl Iterator<Item = &SymbolicRef> {
        const EMPTY: &BTreeSet<SymbolicRef> = &BTreeSet::new();
        match self {
            SharingExpression::ShareWithJust(t) | SharingExpression::DontShareWith(t) => t.iter(),
            _ => EMPTY.iter(),
        }
    }
}

impl fmt::Display for SharingExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn list(f: &mut fmt::Formatter<'_>, targets: &BTreeSet<SymbolicRef>) -> fmt::Result {
            for (i, t) in targets.iter().enumerate() {
                if i > 0 {
                    f.write_str(",")?;
                }
                write!(f, "{t}")?;
            }
            Ok(())
        }
        match self {
            SharingExpression::ShareWithAny => f.write_str("SWAny"),
            SharingExpression::DontShareWithAny => f.write_str("DSWAny"),
            SharingExpression::ShareWithJust(t) => {
                f.write_str("SWJ(")?;
                list(f, t)?;
                f.write_str(")")
            }
            SharingExpression::DontShareWith(t) => {
                f.write_str("DSW(")?;
                list(f, t)?;
                f.write_str(")")
            }
        }
    }
}

/// Syntax error with the character offset where parsing failed.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl ParseError {
    fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            message: message.into(),
        }
    }
}

/// Parses the expression grammar
/// `SWAny | DSWAny | SWJ(<ref>[,<ref>]*) | DSW(<ref>[,<ref>]*)`.
///
/// Keywords are case-sensitive; whitespace around tokens is ignored; target
/// lists are deduplicated. `SWJ()` and `DSW()` are rejected.
pub fn parse_expression(text: &str) -> Result<SharingExpression, ParseError> {
    let trimmed = text.trim_start();
    let start = text.len() - trimmed.len();
    let trimmed = trimmed.trim_end();

    if trimmed == "SWAny" {
        return Ok(SharingExpression::ShareWithAny);
    }
    if trimmed == "DSWAny" {
        return Ok(SharingExpression::DontShareWithAny);
    }

    let (keyword, dont_share) = if let Some(rest) = trimmed.strip_prefix("SWJ") {
        (rest, false)
    } else if let Some(rest) = trimmed.strip_prefix("DSW") {
        (rest, true)
    } else {
        return Err(ParseError::new(
            start,
            format!("expected SWAny, DSWAny, SWJ(..) or DSW(..), found {text:?}"),
        ));
    };
    let keyword_len = trimmed.len() - keyword.len();

    let open = start + keyword_len;
    let body = keyword
        .strip_prefix('(')
        .ok_or_else(|| ParseError::new(open, "expected '(' after keyword"))?;
    let body = body.strip_suffix(')').ok_or_else(|| {
        ParseError::new(start + trimmed.len(), "expected ')' at end of expression")
    })?;

    let mut targets = BTreeSet::new();
    let mut offset = open + 1;
    for piece in body.split(',') {
        let token = piece.trim();
        if token.is_empty() {
            return Err(ParseError::new(offset, "empty target in list"));
        }
        if token.contains(char::is_whitespace) {
            return Err(ParseError::new(
                offset + (piece.len() - piece.trim_start().len()),
                format!("target {token:?} contains whitespace"),
            ));
        }
        targets.insert(match token {
            "P" => SymbolicRef::Partners,
            "Cp" => SymbolicRef::Competitors,
            id => SymbolicRef::Specific(TenantId::from(id)),
        });
        offset += piece.len() + 1;
    }

    Ok(if dont_share {
        SharingExpression::DontShareWith(targets)
    } else {
        SharingExpression::ShareWithJust(targets)
    })
}

// ---------------------------------------------------------------------------
// Allowed sets
// ---------------------------------------------------------------------------

/// Canonical semantics of a resolved expression: the set of tenants the
/// declarer permits to co-reside. `SWAny` maps to all other tenants, `DSWAny`
/// to the empty set, `SWJ(S)` to `S`, and `DSW(S)` to everyone else minus
/// `S`. The declarer itself is never a member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AllowedSet {
    declarer: usize,
    allowed: TenantSet,
}

impl AllowedSet {
    pub fn new(declarer: usize, mut allowed: TenantSet) -> Self {
        allowed.remove(declarer);
        Self { declarer, allowed }
    }

    /// `SWAny` in canonical form: every tenant except the declarer.
    pub fn share_with_any(declarer: usize, registry: &TenantRegistry) -> Self {
        Self {
            declarer,
            allowed: registry.all_others(declarer),
        }
    }

    /// `DSWAny` in canonical form: the empty set.
    pub fn dont_share_with_any(declarer: usize, registry: &TenantRegistry) -> Self {
        Self {
            declarer,
            allowed: TenantSet::empty(registry.len()),
        }
    }

    pub fn declarer(&self) -> usize {
        self.declarer
    }

    pub fn allowed(&self) -> &TenantSet {
        &self.allowed
    }

    pub fn permits(&self, tenant: usize) -> bool {
        self.allowed.contains(tenant)
    }

    /// True when the set equals "all others", i.e. canonical `SWAny`.
    pub fn is_share_with_any(&self) -> bool {
        self.allowed.len() == self.allowed.universe().saturating_sub(1)
    }

    /// True when the set is empty, i.e. canonical `DSWAny`.
    pub fn is_dont_share_with_any(&self) -> bool {
        self.allowed.is_empty()
    }

    /// Allowed tenants as ids, in registry order.
    pub fn allowed_ids<'r>(&self, registry: &'r TenantRegistry) -> Vec<&'r TenantId> {
        self.allowed.iter().map(|i| registry.id(i)).collect()
    }

    /// Renders the canonical expression form this set represents, for
    /// explanations and diagnostics.
    pub fn describe(&self, registry: &TenantRegistry) -> String {
        if self.is_share_with_any() {
            "SWAny".to_owned()
        } else if self.is_dont_share_with_any() {
            "DSWAny".to_owned()
        } else {
            let ids: Vec<String> = self
                .allowed
                .iter()
                .map(|i| registry.id(i).to_string())
                .collect();
            format!("SWJ({})", ids.join(","))
        }
    }
}

/// Resolution failure: an expression referenced an unknown tenant.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("unknown tenant {0} in expression target")]
    UnknownTarget(TenantId),
    #[error("unknown declarer {0}")]
    UnknownDeclarer(TenantId),
}

/// Expands an expression into its allowed set, relative to the declarer.
///
/// `P` and `Cp` expand against the declarer's own relations only. The
/// declarer is stripped from the result, so a self-reference never makes a
/// requirement infeasible.
pub fn resolve(
    expr: &SharingExpression,
    declarer: &TenantId,
    registry: &TenantRegistry,
) -> Result<AllowedSet, ResolveError> {
    let declarer_pos = registry
        .position(declarer)
        .ok_or_else(|| ResolveError::UnknownDeclarer(declarer.clone()))?;
    resolve_at(expr, declarer_pos, registry)
}

/// [`resolve`] for a declarer already looked up in the registry.
pub fn resolve_at(
    expr: &SharingExpression,
    declarer: usize,
    registry: &TenantRegistry,
) -> Result<AllowedSet, ResolveError> {
    let expand = |targets: &BTreeSet<SymbolicRef>| -> Result<TenantSet, ResolveError> {
        let mut set = TenantSet::empty(registry.len());
        for target in targets {
            match target {
                SymbolicRef::Partners => set.union_with(registry.partners_of(declarer)),
                SymbolicRef::Competitors => set.union_with(registry.competitors_of(declarer)),
                SymbolicRef::Specific(id) => match registry.position(id) {
                    Some(pos) => set.insert(pos),
                    None => return Err(ResolveError::UnknownTarget(id.clone())),
                },
            }
        }
        Ok(set)
    };

    Ok(match expr {
        SharingExpression::ShareWithAny => AllowedSet::share_with_any(declarer, registry),
        SharingExpression::DontShareWithAny => AllowedSet::dont_share_with_any(declarer, registry),
        SharingExpression::ShareWithJust(targets) => AllowedSet::new(declarer, expand(targets)?),
        SharingExpression::DontShareWith(targets) => {
            let mut allowed = registry.all_others(declarer);
            allowed.subtract(&expand(targets)?);
            AllowedSet::new(declarer, allowed)
        }
    })
}

/// Combining expressions declared by different tenants is meaningless.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("cannot combine expressions of different declarers ({a} vs {b})")]
pub struct CombineError {
    pub a: usize,
    pub b: usize,
}

/// Folds two allowed sets of the same declarer into one by intersection.
///
/// Commutative, associative, and idempotent, so a cell's expression list can
/// be reduced in any order.
pub fn combine(a: &AllowedSet, b: &AllowedSet) -> Result<AllowedSet, CombineError> {
    if a.declarer != b.declarer {
        return Err(CombineError {
            a: a.declarer,
            b: b.declarer,
        });
    }
    let mut allowed = a.allowed.clone();
    allowed.intersect_with(&b.allowed);
    Ok(AllowedSet {
        declarer: a.declarer,
        allowed,
    })
}

/// Canonical form class of an allowed set, for diagnostics: every set renders
/// as `SWAny`, `DSWAny`, or a positive `SWJ(..)` list.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CanonicalForm {
    ShareWithAny,
    Restricted,
    DontShareWithAny,
}

pub fn canonical_form(set: &AllowedSet) -> CanonicalForm {
    if set.is_share_with_any() {
        CanonicalForm::ShareWithAny
    } else if set.is_dont_share_with_any() {
        CanonicalForm::DontShareWithAny
    } else {
        CanonicalForm::Restricted
    }
}
