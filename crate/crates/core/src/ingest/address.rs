use std::fmt;

use crate::model::Chain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AddressError {
    BadLength,
    BadPrefix,
    BadCharset,
    BadDecode,
}

impl AddressError {
    pub fn as_str(self) -> &'static str {
        match self {
            AddressError::BadLength => "bad-length",
            AddressError::BadPrefix => "bad-prefix",
            AddressError::BadCharset => "bad-charset",
            AddressError::BadDecode => "bad-decode",
        }
    }
}

impl fmt::Display for AddressError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

const EVM_ADDRESS_LEN: usize = 42;
const SOLANA_KEY_BYTES: usize = 32;

/// Format check for a contract address on `chain`.
///
/// EVM chains need `0x` followed by 40 hex digits. Solana addresses must be
/// Bitcoin-alphabet base58 that decodes to a 32-byte public key.
pub fn validate_address(chain: Chain, address: &str) -> Result<(), AddressError> {
    if chain.is_evm() {
        if address.len() != EVM_ADDRESS_LEN {
            return Err(AddressError::BadLength);
        }
        if !address.starts_with("0x") {
            return Err(AddressError::BadPrefix);
        }
        if !address[2..].bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(AddressError::BadCharset);
        }
        Ok(())
    } else {
        match bs58::decode(address).into_vec() {
            Ok(bytes) if bytes.len() == SOLANA_KEY_BYTES => Ok(()),
            Ok(_) => Err(AddressError::BadDecode),
            Err(bs58::decode::Error::InvalidCharacter { .. } | bs58::decode::Error::NonAsciiCharacter { .. }) => {
                Err(AddressError::BadCharset)
            }
            Err(_) => Err(AddressError::BadDecode),
        }
    }
}

/// Hook for confirming that an address has a deployment (creation) transaction.
///
/// Real verification needs a chain client; fixtures use [`AssumeDeployed`].
pub trait DeploymentVerifier: Sync {
    fn is_deployed(&self, chain: Chain, address: &str) -> bool;
}

pub struct AssumeDeployed;

impl DeploymentVerifier for AssumeDeployed {
    fn is_deployed(&self, _chain: Chain, _address: &str) -> bool {
        true
    }
}
