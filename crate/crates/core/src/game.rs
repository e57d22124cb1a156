//! Liquidity Game instances and their bilateral payoff matrices.
//!
//! A game is played between a long player `I` (positive bond balance, wants
//! to sell down) and a short player `J` (negative balance, wants to absorb).
//! Each player offers a parcel size bounded by its absolute balance. A parcel
//! is accepted all-or-nothing: player `I`'s offer trades in full when it fits
//! inside player `J`'s capacity, and nothing trades otherwise. Both sides
//! value the trade at the quantity moved, so every cell is symmetric.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("balance_i and balance_j must have opposite signs (got {balance_i} and {balance_j})")]
    SameSignBalances { balance_i: i64, balance_j: i64 },
    #[error("{field} must be nonzero")]
    ZeroBalance { field: &'static str },
    #[error("{field} = {balance} exceeds issue_cap = {issue_cap}")]
    CapExceeded {
        field: &'static str,
        balance: i64,
        issue_cap: u64,
    },
    #[error("issue_cap must be positive")]
    ZeroIssueCap,
    #[error("trade of {quantity} would flip a balance sign (balances {balance_i}, {balance_j})")]
    OverTrade {
        quantity: u64,
        balance_i: i64,
        balance_j: i64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlayerId {
    I,
    J,
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlayerId::I => f.write_str("I"),
            PlayerId::J => f.write_str("J"),
        }
    }
}

/// A player's signed bond inventory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Holding {
    pub player: PlayerId,
    pub balance: i64,
}

impl Holding {
    pub fn magnitude(&self) -> u64 {
        self.balance.unsigned_abs()
    }
}

/// A parcel size, always stored as an absolute quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Action {
    pub quantity: u64,
}

impl Action {
    pub const fn new(quantity: u64) -> Self {
        Action { quantity }
    }
}

/// Two-player game instance in canonical orientation: `holding_i` is long,
/// `holding_j` is short.
///
/// Action sets hold `|B|, |B|-1, ..., 1` in that (descending) order. The
/// empty play is left out since it always pays nothing. A balance may sit at
/// exactly zero only after [`apply_trade`] has cleared that player, in which
/// case its action set is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "InstanceDoc", into = "InstanceDoc")]
pub struct GameInstance {
    pub holding_i: Holding,
    pub holding_j: Holding,
    pub issue_cap: u64,
    pub action_set_i: Vec<Action>,
    pub action_set_j: Vec<Action>,
}

/// On-disk form of a [`GameInstance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDoc {
    pub balance_i: i64,
    pub balance_j: i64,
    pub issue_cap: u64,
}

impl TryFrom<InstanceDoc> for GameInstance {
    type Error = GameError;

    fn try_from(doc: InstanceDoc) -> Result<Self, Self::Error> {
        build_instance(doc.balance_i, doc.balance_j, doc.issue_cap)
    }
}

impl From<GameInstance> for InstanceDoc {
    fn from(g: GameInstance) -> Self {
        InstanceDoc {
            balance_i: g.holding_i.balance,
            balance_j: g.holding_j.balance,
            issue_cap: g.issue_cap,
        }
    }
}

fn descending_actions(magnitude: u64) -> Vec<Action> {
    (1..=magnitude).rev().map(Action::new).collect()
}

/// Builds a canonical instance. The balances may be given in either order;
/// the positive one is assigned to player `I`.
pub fn build_instance(balance_i: i64, balance_j: i64, issue_cap: u64) -> Result<GameInstance, GameError> {
    if issue_cap == 0 {
        return Err(GameError::ZeroIssueCap);
    }
    if balance_i == 0 {
        return Err(GameError::ZeroBalance { field: "balance_i" });
    }
    if balance_j == 0 {
        return Err(GameError::ZeroBalance { field: "balance_j" });
    }
    if balance_i.signum() == balance_j.signum() {
        return Err(GameError::SameSignBalances { balance_i, balance_j });
    }
    for (field, balance) in [("balance_i", balance_i), ("balance_j", balance_j)] {
        if balance.unsigned_abs() > issue_cap {
            return Err(GameError::CapExceeded {
                field,
                balance,
                issue_cap,
            });
        }
    }
    let (long, short) = if balance_i > 0 {
        (balance_i, balance_j)
    } else {
        (balance_j, balance_i)
    };
    Ok(GameInstance::from_canonical(long, short, issue_cap))
}

impl GameInstance {
    fn from_canonical(long: i64, short: i64, issue_cap: u64) -> Self {
        debug_assert!(long >= 0 && short <= 0);
        GameInstance {
            holding_i: Holding {
                player: PlayerId::I,
                balance: long,
            },
            holding_j: Holding {
                player: PlayerId::J,
                balance: short,
            },
            issue_cap,
            action_set_i: descending_actions(long.unsigned_abs()),
            action_set_j: descending_actions(short.unsigned_abs()),
        }
    }

    pub fn balances(&self) -> (i64, i64) {
        (self.holding_i.balance, self.holding_j.balance)
    }

    /// True once either side has been brought to a zero balance.
    pub fn is_cleared(&self) -> bool {
        self.holding_i.balance == 0 || self.holding_j.balance == 0
    }
}

/// Payoff of one simultaneous play: `offer` is the long player's parcel and
/// `capacity` the short player's. The parcel trades in full when
/// `0 < offer <= capacity`; otherwise nothing moves.
pub fn bilateral_payoff(offer: Action, capacity: Action) -> (i64, i64) {
    if offer.quantity > 0 && offer.quantity <= capacity.quantity {
        let q = offer.quantity as i64;
        (q, q)
    } else {
        (0, 0)
    }
}

/// Moves `quantity` bonds from the long player to the short player.
pub fn apply_trade(instance: &GameInstance, quantity: u64) -> Result<GameInstance, GameError> {
    let (bi, bj) = instance.balances();
    let room = bi.unsigned_abs().min(bj.unsigned_abs());
    if quantity == 0 || quantity > room {
        return Err(GameError::OverTrade {
            quantity,
            balance_i: bi,
            balance_j: bj,
        });
    }
    let q = quantity as i64;
    let next = GameInstance::from_canonical(bi - q, bj + q, instance.issue_cap);
    debug_assert_eq!(next.holding_i.balance + next.holding_j.balance, bi + bj);
    Ok(next)
}

/// Integer bimatrix. `cells[r][c]` is `(u_i, u_j)` for row action `r` of
/// player `I` and column action `c` of player `J`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PayoffMatrix {
    pub row_actions: Vec<Action>,
    pub col_actions: Vec<Action>,
    pub cells: Vec<Vec<(i64, i64)>>,
}

impl PayoffMatrix {
    /// Wraps an arbitrary rectangular bimatrix. Actions are labelled
    /// `n, n-1, ..., 1` to mirror the liquidity-game layout.
    ///
    /// Panics if the rows are ragged.
    pub fn from_cells(cells: Vec<Vec<(i64, i64)>>) -> Self {
        let rows = cells.len();
        let cols = cells.first().map_or(0, Vec::len);
        assert!(cells.iter().all(|r| r.len() == cols), "ragged payoff matrix");
        PayoffMatrix {
            row_actions: descending_actions(rows as u64),
            col_actions: descending_actions(cols as u64),
            cells,
        }
    }

    pub fn rows(&self) -> usize {
        self.cells.len()
    }

    pub fn cols(&self) -> usize {
        self.cells.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    pub fn payoff(&self, row: usize, col: usize) -> (i64, i64) {
        self.cells[row][col]
    }

    pub fn row_payoff(&self, row: usize, col: usize) -> i64 {
        self.cells[row][col].0
    }

    pub fn col_payoff(&self, row: usize, col: usize) -> i64 {
        self.cells[row][col].1
    }

    /// One line per matrix row, cells rendered `u_i|u_j`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for row in &self.cells {
            let line: Vec<String> = row.iter().map(|(a, b)| format!("{a}|{b}")).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut cells = Vec::new();
        for (ln, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let row = line
                .split(',')
                .map(|cell| {
                    let (a, b) = cell
                        .trim()
                        .split_once('|')
                        .ok_or_else(|| format!("line {}: cell {cell:?} is not u_i|u_j", ln + 1))?;
                    let parse = |s: &str| {
                        s.trim()
                            .parse::<i64>()
                            .map_err(|e| format!("line {}: {e}", ln + 1))
                    };
                    Ok((parse(a)?, parse(b)?))
                })
                .collect::<Result<Vec<_>, String>>()?;
            cells.push(row);
        }
        let cols = cells.first().map_or(0, Vec::len);
        if cells.iter().any(|r| r.len() != cols) {
            return Err("ragged payoff matrix".into());
        }
        Ok(PayoffMatrix::from_cells(cells))
    }
}

// JSON form is the bare nested array of [u_i, u_j] pairs.
impl Serialize for PayoffMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let nested: Vec<Vec<[i64; 2]>> = self
            .cells
            .iter()
            .map(|r| r.iter().map(|&(a, b)| [a, b]).collect())
            .collect();
        nested.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PayoffMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let nested = Vec::<Vec<[i64; 2]>>::deserialize(deserializer)?;
        let cols = nested.first().map_or(0, Vec::len);
        if nested.iter().any(|r| r.len() != cols) {
            return Err(serde::de::Error::custom("ragged payoff matrix"));
        }
        Ok(PayoffMatrix::from_cells(
            nested
                .into_iter()
                .map(|r| r.into_iter().map(|[a, b]| (a, b)).collect())
                .collect(),
        ))
    }
}

/// Full payoff matrix over both action sets, rows and columns in descending
/// quantity.
pub fn build_payoff_matrix(instance: &GameInstance) -> PayoffMatrix {
    let cells = instance
        .action_set_i
        .iter()
        .map(|&offer| {
            instance
                .action_set_j
                .iter()
                .map(|&capacity| bilateral_payoff(offer, capacity))
                .collect()
        })
        .collect();
    PayoffMatrix {
        row_actions: instance.action_set_i.clone(),
        col_actions: instance.action_set_j.clone(),
        cells,
    }
}
