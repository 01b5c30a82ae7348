use crate::hash::{hmac_sha256, sha3_256};
use crate::suite::SharedSecret;

pub const LABEL_CLIENT_TRAFFIC: &[u8] = b"pqtls c traffic";
pub const LABEL_SERVER_TRAFFIC: &[u8] = b"pqtls s traffic";
pub const LABEL_CLIENT_FINISHED: &[u8] = b"pqtls c finished";
pub const LABEL_SERVER_FINISHED: &[u8] = b"pqtls s finished";

#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SessionKeys {
    pub client_traffic: [u8; 32],
    pub server_traffic: [u8; 32],
    pub client_finished_key: [u8; 32],
    pub server_finished_key: [u8; 32],
}

impl std::fmt::Debug for SessionKeys {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SessionKeys").finish_non_exhaustive()
    }
}

impl SessionKeys {
    /// SHA3-256 over all four keys; lets two endpoints compare key material
    /// without revealing it.
    pub fn fingerprint(&self) -> [u8; 32] {
        sha3_256(&[
            &self.client_traffic,
            &self.server_traffic,
            &self.client_finished_key,
            &self.server_finished_key,
        ])
    }
}

/// prk = HMAC(key = transcript_hash, msg = ss); key_i = HMAC(prk, label_i ‖ 0x01).
pub fn key_schedule(shared_secret: &SharedSecret, transcript_hash: &[u8; 32]) -> SessionKeys {
    let prk = hmac_sha256(transcript_hash, &[shared_secret]);
    let expand = |label: &[u8]| hmac_sha256(&prk, &[label, &[0x01]]);
    SessionKeys {
        client_traffic: expand(LABEL_CLIENT_TRAFFIC),
        server_traffic: expand(LABEL_SERVER_TRAFFIC),
        client_finished_key: expand(LABEL_CLIENT_FINISHED),
        server_finished_key: expand(LABEL_SERVER_FINISHED),
    }
}

pub fn finished_mac(finished_key: &[u8; 32], transcript_hash: &[u8; 32]) -> [u8; 32] {
    hmac_sha256(finished_key, &[transcript_hash])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn different_secrets_change_every_key() {
        let a = key_schedule(&[0; 32], &[0; 32]);
        let b = key_schedule(&[1; 32], &[0; 32]);
        assert_ne!(a.client_traffic, b.client_traffic);
        assert_ne!(a.server_traffic, b.server_traffic);
        assert_ne!(a.client_finished_key, b.client_finished_key);
        assert_ne!(a.server_finished_key, b.server_finished_key);
        assert_eq!(a, key_schedule(&[0; 32], &[0; 32]));
    }

    #[test]
    fn keys_are_pairwise_distinct() {
        let k = key_schedule(&[9; 32], &[3; 32]);
        let all = [
            k.client_traffic,
            k.server_traffic,
            k.client_finished_key,
            k.server_finished_key,
        ];
        for i in 0..4 {
            for j in i + 1..4 {
                assert_ne!(all[i], all[j]);
            }
        }
    }
}
