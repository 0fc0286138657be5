//! Asset-state data shapes and their JSON forms.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// Decimal-string (de)serialization for integer base-unit amounts, which
/// routinely exceed 64 bits.
pub(crate) mod amount_serde {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(u64),
        }
        match Raw::deserialize(d)? {
            Raw::Number(n) => Ok(BigUint::from(n)),
            Raw::Text(t) => BigUint::parse_bytes(t.as_bytes(), 10)
                .ok_or_else(|| D::Error::custom(format!("malformed amount `{t}`"))),
        }
    }
}

/// Constant-product pool with a parts-per-million fee factor
/// (997000 = 0.3% fee).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoolState {
    pub id: String,
    pub token0: String,
    pub token1: String,
    #[serde(with = "amount_serde")]
    pub reserve0: BigUint,
    #[serde(with = "amount_serde")]
    pub reserve1: BigUint,
    #[serde(default = "default_fee_ppm")]
    pub fee_ppm: u32,
    /// Account holding the pool's actual token balances; defaults to the
    /// pool id.
    #[serde(default)]
    pub account: String,
}

pub(crate) fn default_fee_ppm() -> u32 {
    997_000
}

impl PoolState {
    pub fn tokens(&self) -> [&str; 2] {
        [&self.token0, &self.token1]
    }

    pub fn reserve_of(&self, token: &str) -> Option<&BigUint> {
        if token == self.token0 {
            Some(&self.reserve0)
        } else if token == self.token1 {
            Some(&self.reserve1)
        } else {
            None
        }
    }
}

/// Oracle price of one token in numeraire units, as a rational.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Price {
    #[serde(with = "amount_serde")]
    pub num: BigUint,
    #[serde(with = "amount_serde")]
    pub den: BigUint,
}

/// Transfer-side fee behavior. Shares are in basis points of the transfer
/// amount; burn + retained must equal the total rate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeeModel {
    pub rate_bps: u32,
    pub burn_bps: u32,
    pub retained_bps: u32,
    /// Account credited with the retained share; also the retained-fee
    /// ledger key.
    pub retention_holder: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recipient {
    pub account: String,
    pub weight: u64,
}

/// One abstract asset operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum AssetOp {
    Mint {
        token: String,
        to: String,
        #[serde(with = "amount_serde")]
        amount: BigUint,
    },
    Burn {
        token: String,
        from: String,
        #[serde(with = "amount_serde")]
        amount: BigUint,
    },
    Transfer {
        token: String,
        from: String,
        to: String,
        #[serde(with = "amount_serde")]
        amount: BigUint,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fee: Option<FeeModel>,
    },
    Approve {
        owner: String,
        spender: String,
        token: String,
        #[serde(with = "amount_serde")]
        amount: BigUint,
    },
    SwapExactIn {
        pool: String,
        token_in: String,
        #[serde(with = "amount_serde")]
        amount_in: BigUint,
        recipient: String,
    },
    FlashBorrow {
        token: String,
        #[serde(with = "amount_serde")]
        amount: BigUint,
        to: String,
    },
    FlashRepay {
        token: String,
        #[serde(with = "amount_serde")]
        amount: BigUint,
        from: String,
    },
    Skim {
        pool: String,
        to: String,
    },
    Sync {
        pool: String,
    },
    ReleaseRetained {
        token: String,
        holder: String,
        recipients: Vec<Recipient>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct BalanceEntry {
    account: String,
    token: String,
    #[serde(with = "amount_serde")]
    amount: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct AllowanceEntry {
    owner: String,
    spender: String,
    token: String,
    #[serde(with = "amount_serde")]
    amount: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct RetainedEntry {
    token: String,
    holder: String,
    #[serde(with = "amount_serde")]
    amount: BigUint,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct PriceEntry {
    token: String,
    #[serde(flatten)]
    price: Price,
}

/// Balances plus price-relevant state. Serializes to sorted entry arrays so
/// trace snapshots diff cleanly.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssetState {
    pub balances: BTreeMap<(String, String), BigUint>,
    pub pools: BTreeMap<String, PoolState>,
    pub prices: BTreeMap<String, Price>,
    pub allowances: BTreeMap<(String, String, String), BigUint>,
    pub retained: BTreeMap<(String, String), BigUint>,
}

impl AssetState {
    pub fn balance(&self, account: &str, token: &str) -> BigUint {
        self.balances
            .get(&(account.to_string(), token.to_string()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn set_balance(&mut self, account: &str, token: &str, amount: BigUint) {
        let key = (account.to_string(), token.to_string());
        if amount == BigUint::default() {
            self.balances.remove(&key);
        } else {
            self.balances.insert(key, amount);
        }
    }

    pub fn credit(&mut self, account: &str, token: &str, amount: &BigUint) {
        let current = self.balance(account, token);
        self.set_balance(account, token, current + amount);
    }

    /// Total supply of a token: the sum over all account balances (pool
    /// holdings live in the pool's account, so reserves are not re-counted).
    pub fn total_supply(&self, token: &str) -> BigUint {
        self.balances
            .iter()
            .filter(|((_, t), _)| t == token)
            .map(|(_, v)| v)
            .sum()
    }

    /// Register a pool; its account balance entries are initialized to the
    /// tracked reserves so balances and reserves start out consistent.
    pub fn add_pool(&mut self, mut pool: PoolState) {
        if pool.account.is_empty() {
            pool.account = pool.id.clone();
        }
        self.credit(&pool.account.clone(), &pool.token0.clone(), &pool.reserve0.clone());
        self.credit(&pool.account.clone(), &pool.token1.clone(), &pool.reserve1.clone());
        self.pools.insert(pool.id.clone(), pool);
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct AssetStateDoc {
    #[serde(default)]
    balances: Vec<BalanceEntry>,
    #[serde(default)]
    pools: Vec<PoolState>,
    #[serde(default)]
    prices: Vec<PriceEntry>,
    #[serde(default)]
    allowances: Vec<AllowanceEntry>,
    #[serde(default)]
    retained: Vec<RetainedEntry>,
}

impl Serialize for AssetState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let doc = AssetStateDoc {
            balances: self
                .balances
                .iter()
                .map(|((account, token), amount)| BalanceEntry {
                    account: account.clone(),
                    token: token.clone(),
                    amount: amount.clone(),
                })
                .collect(),
            pools: self.pools.values().cloned().collect(),
            prices: self
                .prices
                .iter()
                .map(|(token, price)| PriceEntry {
                    token: token.clone(),
                    price: price.clone(),
                })
                .collect(),
            allowances: self
                .allowances
                .iter()
                .map(|((owner, spender, token), amount)| AllowanceEntry {
                    owner: owner.clone(),
                    spender: spender.clone(),
                    token: token.clone(),
                    amount: amount.clone(),
                })
                .collect(),
            retained: self
                .retained
                .iter()
                .map(|((token, holder), amount)| RetainedEntry {
                    token: token.clone(),
                    holder: holder.clone(),
                    amount: amount.clone(),
                })
                .collect(),
        };
        doc.serialize(s)
    }
}

impl<'de> Deserialize<'de> for AssetState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let doc = AssetStateDoc::deserialize(d)?;
        let mut state = AssetState::default();
        for b in doc.balances {
            state.credit(&b.account, &b.token, &b.amount);
        }
        for p in doc.pools {
            state.add_pool(p);
        }
        for p in doc.prices {
            state.prices.insert(p.token, p.price);
        }
        for a in doc.allowances {
            state.allowances.insert((a.owner, a.spender, a.token), a.amount);
        }
        for r in doc.retained {
            state.retained.insert((r.token, r.holder), r.amount);
        }
        Ok(state)
    }
}

/// On-disk scenario: an initial state block plus the op script.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub initial: AssetState,
    pub script: Vec<AssetOp>,
    pub attacker: Vec<String>,
    pub numeraire: String,
    #[serde(default)]
    pub mode: Option<String>,
}
