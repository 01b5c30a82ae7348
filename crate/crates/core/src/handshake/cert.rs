//! Depth-one certificate chain: a root key signs each server leaf key.

use super::messages::{Certificate, MAX_SUBJECT_LEN};
use crate::suite::{CryptoError, Registry, SigKeyPair};

/// Root public key trusted by a client. Certificates are checked against
/// the anchor whose algorithm matches the certificate's `sig_alg`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrustAnchor {
    pub alg: u16,
    pub public_key: Vec<u8>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TrustStore {
    pub anchors: Vec<TrustAnchor>,
}

impl TrustStore {
    pub fn new(anchors: Vec<TrustAnchor>) -> Self {
        Self { anchors }
    }

    pub fn for_alg(&self, alg: u16) -> impl Iterator<Item = &TrustAnchor> {
        self.anchors.iter().filter(move |a| a.alg == alg)
    }

    /// `true` if some anchor of the certificate's algorithm vouches for it.
    pub fn verify(&self, registry: &Registry, cert: &Certificate) -> bool {
        self.for_alg(cert.sig_alg)
            .any(|a| cert_verify(registry, a, cert))
    }
}

pub fn cert_issue(
    registry: &Registry,
    root: &SigKeyPair,
    subject: &str,
    subject_keypair: &SigKeyPair,
) -> Result<Certificate, CryptoError> {
    if subject.len() > MAX_SUBJECT_LEN {
        return Err(CryptoError::WrongLength {
            field: "subject",
            expected: MAX_SUBJECT_LEN,
            actual: subject.len(),
        });
    }
    let tbs = Certificate::to_be_signed(subject, subject_keypair.alg, &subject_keypair.public_key);
    let issuer_sig = registry.sig_sign(root.alg, &root.secret_key, &tbs)?;
    Ok(Certificate {
        subject: subject.to_string(),
        sig_alg: subject_keypair.alg,
        subject_pk: subject_keypair.public_key.clone(),
        issuer_sig,
    })
}

pub fn cert_verify(registry: &Registry, anchor: &TrustAnchor, cert: &Certificate) -> bool {
    let tbs = Certificate::to_be_signed(&cert.subject, cert.sig_alg, &cert.subject_pk);
    registry
        .sig_verify(anchor.alg, &anchor.public_key, &tbs, &cert.issuer_sig)
        .unwrap_or(false)
}
