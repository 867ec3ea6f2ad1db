#![allow(dead_code)]

use estate_core::{
    Address, Behavior, Call, Cid, HexBytes, ImplementationVersion, Ledger, Outcome, Role, SwapDescriptor, TokenId,
};
use estate_core::merkle_root;
use rand::Rng;

pub fn key(name: &str) -> HexBytes {
    HexBytes(name.as_bytes().to_vec())
}

pub fn addr(name: &str) -> Address {
    Address::from_public_key(name.as_bytes())
}

/// A ledger with one administrator, sellers, buyers, a realtor, a live
/// factory and `properties` deployed (and approved when `approve`).
pub struct World {
    pub ledger: Ledger,
    pub admin: Address,
    pub sellers: Vec<Address>,
    pub buyers: Vec<Address>,
    pub realtor: Address,
    pub properties: Vec<Address>,
    pub clock: u64,
}

impl World {
    pub fn new(properties: usize, approve: bool) -> World {
        let mut ledger = Ledger::genesis(1);
        let admin = addr("admin");
        ledger
            .execute(admin, Call::Bootstrap { public_key: key("admin"), info: key("admin kyc") }, 0)
            .unwrap();
        let mut w = World {
            ledger,
            admin,
            sellers: Vec::new(),
            buyers: Vec::new(),
            realtor: Address::ZERO,
            properties: Vec::new(),
            clock: 1,
        };
        for name in ["seller-a", "seller-b"] {
            let a = w.register(Role::Seller, name);
            w.sellers.push(a);
        }
        for name in ["buyer-a", "buyer-b"] {
            let a = w.register(Role::Buyer, name);
            w.buyers.push(a);
        }
        w.realtor = w.register(Role::Realtor, "realtor");
        for a in w.accounts() {
            w.ok(admin, Call::Faucet { to: a, amount: 1_000_000 }, 0);
        }
        w.ok(
            admin,
            Call::InitializeFactory { implementation: ImplementationVersion::new(1, Behavior::PropertyV1), admin, upgrader: admin },
            0,
        );
        for i in 0..properties {
            let owner = w.sellers[i % w.sellers.len()];
            let p = w.deploy(owner);
            w.add_docs(p, owner, &[&format!("deed {i}"), &format!("survey {i}")]);
            if approve {
                w.approve(p);
            }
        }
        w.seal();
        w
    }

    pub fn accounts(&self) -> Vec<Address> {
        let mut v = vec![self.admin];
        v.extend(&self.sellers);
        v.extend(&self.buyers);
        v.push(self.realtor);
        v
    }

    pub fn register(&mut self, role: Role, name: &str) -> Address {
        let info = self.put(&format!("{name} kyc"));
        match self.ok(self.admin, Call::RegisterStakeholder { role, public_key: key(name), info }, 0) {
            Outcome::Address(a) => a,
            other => panic!("unexpected {other:?}"),
        }
    }

    pub fn put(&mut self, text: &str) -> Cid {
        match self.ok(self.admin, Call::PutObject { bytes: key(text) }, 0) {
            Outcome::Cid(c) => c,
            other => panic!("unexpected {other:?}"),
        }
    }

    pub fn deploy(&mut self, property_admin: Address) -> Address {
        let call = Call::DeployPropertyContract {
            treasury: self.admin,
            upgrader: self.admin,
            admin: property_admin,
            uri: "ipfs://estate/{id}".into(),
            contract_name: "Property".into(),
            description: String::new(),
        };
        match self.ok(self.admin, call, 0) {
            Outcome::Address(a) => {
                self.properties.push(a);
                a
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    pub fn add_docs(&mut self, property: Address, caller: Address, docs: &[&str]) {
        for d in docs {
            let cid = self.put(d);
            self.ok(caller, Call::RegisterDocument { property, cid }, 0);
        }
    }

    pub fn approve(&mut self, property: Address) {
        let leaves: Vec<_> = self.ledger.property(&property).unwrap().documents().iter().map(|c| *c.digest()).collect();
        let root = merkle_root(&leaves).unwrap();
        self.ok(self.admin, Call::ApprovedProperty { property, parent_hash: root, prop_address: property }, 0);
    }

    pub fn ok(&mut self, caller: Address, call: Call, value: u64) -> Outcome {
        let desc = format!("{call:?}");
        self.ledger
            .execute(caller, call, value)
            .unwrap_or_else(|e| panic!("{desc} failed: {e}"))
    }

    pub fn seal(&mut self) {
        self.clock += 1;
        self.ledger.seal_block(&self.admin, self.clock).unwrap();
    }
}

/// Random calls over a small id and amount space, biased toward calls that
/// can succeed.
pub fn random_call<R: Rng>(w: &World, rng: &mut R) -> (Address, Call, u64) {
    let accounts = w.accounts();
    let pick = |rng: &mut R| accounts[rng.random_range(0..accounts.len())];
    let property = w.properties[rng.random_range(0..w.properties.len())];
    let right = TokenId::from_u64(rng.random_range(1..=4));
    let id = if rng.random_bool(0.5) { right } else { right.fractional().unwrap() };
    let amount = rng.random_range(0..=6u64);
    let value = if rng.random_bool(0.3) { 0 } else { rng.random_range(0..=40u64) };
    let caller = if rng.random_bool(0.6) {
        // property admin or a holder is a likely caller
        let p = w.ledger.property(&property).unwrap();
        match p.tokens().holders(&id).next() {
            Some((h, _)) if rng.random_bool(0.5) => *h,
            _ => p.admin(),
        }
    } else {
        pick(rng)
    };
    let to = pick(rng);
    let call = match rng.random_range(0..12) {
        0 => Call::MintNft { property, id: right, data: HexBytes(vec![]), price: rng.random_range(0..5) },
        1 => {
            let ids: Vec<TokenId> = (0..rng.random_range(1..=3)).map(|_| TokenId::from_u64(rng.random_range(1..=4))).collect();
            let n = ids.len();
            Call::MintBatchNfts { property, ids, amounts: vec![1; n], data: HexBytes(vec![]), prices: vec![1; n] }
        }
        2 => Call::MintFractional { property, right_id: right, units: rng.random_range(1..=50), price_per_unit: rng.random_range(0..4) },
        3 | 4 => Call::TransferNft { property, to, id, amount, data: HexBytes(vec![]) },
        5 => Call::BurnNft { property, from: caller, id, amount },
        6 => {
            let ids = vec![id, TokenId::from_u64(rng.random_range(1..=4)).fractional().unwrap()];
            Call::SafeTransferBatch { property, from: caller, to, ids, amounts: vec![amount, rng.random_range(0..=3)] }
        }
        7 => Call::SetPrice { property, id, price_per_unit: rng.random_range(0..5) },
        8 => Call::DistributeEarnings { property, right_id: right, total: rng.random_range(0..200) },
        9 => Call::TransferNative { to, amount: rng.random_range(0..100) },
        10 => Call::SetApprovalForAll { property, operator: to, approved: rng.random_bool(0.5) },
        _ => {
            let swap = SwapDescriptor {
                property,
                party_a: caller,
                party_b: to,
                legs_a: vec![(id, amount)],
                legs_b: vec![(TokenId::from_u64(rng.random_range(1..=4)).fractional().unwrap(), rng.random_range(0..=3))],
                value_a: 0,
                value_b: rng.random_range(0..10),
            };
            if rng.random_bool(0.5) {
                Call::ConsentSwap { swap }
            } else {
                Call::AtomicSwap { swap }
            }
        }
    };
    let value = if call.is_payable() { value } else { 0 };
    (caller, call, value)
}
