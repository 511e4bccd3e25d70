use super::alice::{alice_check_action2, alice_check_action3, alice_check_action4};
use super::channel::{AncillaAccess, Disclosure, OutboundLeg, PartyDisclosure, ReturnLeg};
use super::party::{classical_party_turn, ClassicalOp, ClassicalParty};
use super::{
    AliceAction, Party, PartyChoice, ProtocolError, ProtocolVariant, PublicEvent, ReflectionOrder,
    RoundRecord, SessionConfig, SessionResult, ALICE_QUBIT,
};
use crate::adversary::AttackStrategy;
use crate::qsim::{seeded_rng, SimRng, StateVector};
use crate::states::prepare_psi;
use rand::seq::{index, SliceRandom};
use rand::Rng;

/// Alice's action for a pair of choices.
pub fn dispatch_action(bob: PartyChoice, charlie: PartyChoice) -> AliceAction {
    use PartyChoice::{Check, Share};
    match (bob, charlie) {
        (Share, Share) => AliceAction::Action1,
        (Share, Check) => AliceAction::Action2,
        (Check, Share) => AliceAction::Action3,
        (Check, Check) => AliceAction::Action4,
    }
}

/// Actions for positions `1..=n` given each party's announced reflection
/// order; positions absent from an order were measured by that party.
pub fn dispatch_from_orders(
    n: usize,
    bob_order: &[usize],
    charlie_order: &[usize],
) -> Result<Vec<AliceAction>, ProtocolError> {
    let bob = ReflectionOrder::new(bob_order.to_vec(), n)?;
    let charlie = ReflectionOrder::new(charlie_order.to_vec(), n)?;
    let choice = |order: &ReflectionOrder, p: usize| {
        if order.positions().contains(&p) {
            PartyChoice::Check
        } else {
            PartyChoice::Share
        }
    };
    Ok((1..=n)
        .map(|p| dispatch_action(choice(&bob, p), choice(&charlie, p)))
        .collect())
}

fn fair_choice(rng: &mut impl Rng) -> PartyChoice {
    if rng.random_bool(0.5) {
        PartyChoice::Share
    } else {
        PartyChoice::Check
    }
}

/// Runs steps 1-7 of one session against `attack`.
///
/// The session draws from stream 0 of a ChaCha generator seeded with
/// `config.seed`; the attack draws from stream 1 of the same seed, so an
/// attack never shifts the honest parties' random choices.
pub fn run_session(
    config: &SessionConfig,
    attack: &mut AttackStrategy,
) -> Result<SessionResult, ProtocolError> {
    config.validate()?;
    let n = config.n_triplets;
    let variant = config.variant;
    let mut rng = seeded_rng(config.seed);
    let mut attack_rng: SimRng = seeded_rng(config.seed);
    attack_rng.set_stream(1);

    attack.begin(config, &mut attack_rng)?;

    // Step 1: distribution.
    let mut registers: Vec<StateVector> = vec![prepare_psi(); n];
    for (i, reg) in registers.iter_mut().enumerate() {
        attack.outbound(&mut OutboundLeg::new(i + 1, reg), &mut attack_rng)?;
    }

    // Step 2: each party handles its qubit.
    let mut bob = ClassicalParty::new(Party::Bob, variant);
    let mut charlie = ClassicalParty::new(Party::Charlie, variant);
    let mut choices = Vec::with_capacity(n);
    let mut bits = Vec::with_capacity(n);
    let mut bob_queue = Vec::new();
    let mut charlie_queue = Vec::new();
    for (i, reg) in registers.iter_mut().enumerate() {
        let position = i + 1;
        let mut pair = [PartyChoice::Share; 2];
        let mut pair_bits = [None; 2];
        for (k, party) in Party::BOTH.into_iter().enumerate() {
            let honest = fair_choice(&mut rng);
            let choice = attack.forced_choice(party, position).unwrap_or(honest);
            let (actor, queue) = match party {
                Party::Bob => (&mut bob, &mut bob_queue),
                Party::Charlie => (&mut charlie, &mut charlie_queue),
            };
            let turn = classical_party_turn(actor, choice, reg, &mut rng)?;
            if turn.returned {
                queue.push(position);
            }
            pair[k] = choice;
            pair_bits[k] = turn.bit;
        }
        choices.push(pair);
        bits.push(pair_bits);
    }

    let mut orders = [None, None];
    if variant == ProtocolVariant::RandomizationBased {
        for (k, (actor, queue)) in [
            (&mut bob, &mut bob_queue),
            (&mut charlie, &mut charlie_queue),
        ]
        .into_iter()
        .enumerate()
        {
            if queue.len() > 1 {
                actor.perform(ClassicalOp::Reorder)?;
                queue.shuffle(&mut rng);
            }
            orders[k] = Some(ReflectionOrder::new(queue.clone(), n)?);
        }
    }

    // Step 4 content, published either after (compliant) or before (broken)
    // the receipt announcement of step 3.
    let party_disclosure = |k: usize, order: Option<ReflectionOrder>| PartyDisclosure {
        choices: choices.iter().map(|c| c[k]).collect(),
        order,
    };
    let [bob_order, charlie_order] = orders;
    let mut disclosure = Disclosure {
        bob: party_disclosure(0, bob_order),
        charlie: party_disclosure(1, charlie_order),
        check_bits: Default::default(),
    };
    let mut disclosure_events = vec![
        PublicEvent::Disclosed { party: Party::Bob },
        PublicEvent::Disclosed {
            party: Party::Charlie,
        },
    ];
    for (i, (pair, b)) in choices.iter().zip(&bits).enumerate() {
        let announced = match dispatch_action(pair[0], pair[1]) {
            AliceAction::Action2 => Some((Party::Bob, b[0].expect("SHARE has a bit"))),
            AliceAction::Action3 => Some((Party::Charlie, b[1].expect("SHARE has a bit"))),
            _ => None,
        };
        if let Some((party, bit)) = announced {
            disclosure.check_bits.insert(i + 1, (party, bit));
            disclosure_events.push(PublicEvent::CheckBitAnnounced {
                party,
                position: i + 1,
                bit,
            });
        }
    }

    let slots_in_position_order = variant == ProtocolVariant::MeasureResend;
    let mut transcript = Vec::new();
    if config.announce_receipt_before_disclosure {
        attack.returning(
            &mut ReturnLeg::new(
                &mut registers,
                &bob_queue,
                &charlie_queue,
                slots_in_position_order,
                None,
            ),
            &mut attack_rng,
        )?;
        transcript.push(PublicEvent::ReceiptAnnounced);
        transcript.extend(disclosure_events);
    } else {
        transcript.extend(disclosure_events);
        attack.returning(
            &mut ReturnLeg::new(
                &mut registers,
                &bob_queue,
                &charlie_queue,
                slots_in_position_order,
                Some(&disclosure),
            ),
            &mut attack_rng,
        )?;
        transcript.push(PublicEvent::ReceiptAnnounced);
    }
    attack.after_disclosure(
        &mut AncillaAccess::new(&mut registers),
        &disclosure,
        &mut attack_rng,
    )?;

    // Step 5: Alice pairs reflected qubits with her own using the announced
    // orders and acts per position.
    for (k, order) in [&disclosure.bob.order, &disclosure.charlie.order]
        .into_iter()
        .enumerate()
    {
        if let Some(order) = order {
            let checks: Vec<usize> = (1..=n)
                .filter(|&p| choices[p - 1][k] == PartyChoice::Check)
                .collect();
            if !order.covers(&checks) {
                return Err(ProtocolError::InvalidOrder(order.positions().to_vec()));
            }
        }
    }
    let mut records = Vec::with_capacity(n);
    for (i, reg) in registers.iter_mut().enumerate() {
        let [bc, cc] = choices[i];
        let [bob_bit, charlie_bit] = bits[i];
        let action = dispatch_action(bc, cc);
        let mut record = RoundRecord {
            index: i + 1,
            bob_choice: bc,
            charlie_choice: cc,
            bob_bit,
            charlie_bit,
            alice_action: action,
            alice_bit: None,
            check_outcome: None,
            revealed: false,
            error_flag: false,
        };
        let check = match action {
            AliceAction::Action1 => {
                let out = reg.measure_computational(ALICE_QUBIT, &mut rng)?;
                record.alice_bit = Some(out.outcome_index as u8);
                None
            }
            AliceAction::Action2 => Some(alice_check_action2(
                reg,
                bob_bit.expect("SHARE has a bit"),
                &mut rng,
            )?),
            AliceAction::Action3 => Some(alice_check_action3(
                reg,
                charlie_bit.expect("SHARE has a bit"),
                &mut rng,
            )?),
            AliceAction::Action4 => Some(alice_check_action4(reg, &mut rng)?),
        };
        if let Some(check) = check {
            record.check_outcome = Some((check.outcome.basis_label, check.outcome.outcome_index));
            record.error_flag = check.error_flag;
        }
        records.push(record);
    }

    // Steps 6 and 7.
    let mut result = finalize(records, config, &mut rng);
    transcript.append(&mut result.transcript);
    result.transcript = transcript;
    result.bob_ops = bob.into_ops();
    result.charlie_ops = charlie.into_ops();
    Ok(result)
}

/// Error-rate check, reveal of a random half of the case-1 rounds, and the
/// secret built from the rest.
pub fn finalize(
    mut records: Vec<RoundRecord>,
    config: &SessionConfig,
    rng: &mut impl Rng,
) -> SessionResult {
    let mut case_counts = [0usize; 4];
    let mut flagged = [0usize; 4];
    for r in &records {
        let c = r.alice_action.case() - 1;
        case_counts[c] += 1;
        flagged[c] += usize::from(r.error_flag);
    }
    let rate = |bad: usize, total: usize| {
        if total == 0 {
            0.0
        } else {
            bad as f64 / total as f64
        }
    };
    let mut error_rates = [0.0; 4];
    for c in 1..4 {
        error_rates[c] = rate(flagged[c], case_counts[c]);
    }
    let mut transcript = Vec::new();
    let step6_abort = error_rates[1..].iter().any(|&e| e > config.error_threshold);
    transcript.push(PublicEvent::ErrorRatesChecked {
        aborted: step6_abort,
    });

    let mut result = SessionResult {
        records: Vec::new(),
        error_rates,
        case_counts,
        aborted: step6_abort,
        revealed_positions: Vec::new(),
        secret_positions: Vec::new(),
        alice_secret: Vec::new(),
        reconstructed_secret: Vec::new(),
        transcript: Vec::new(),
        bob_ops: Vec::new(),
        charlie_ops: Vec::new(),
    };
    if step6_abort {
        result.records = records;
        result.transcript = transcript;
        return result;
    }

    let share_rounds: Vec<usize> = records
        .iter()
        .filter(|r| r.alice_action == AliceAction::Action1)
        .map(|r| r.index)
        .collect();
    let reveal_count = (share_rounds.len() as f64 * config.reveal_fraction).ceil() as usize;
    let mut revealed: Vec<usize> = index::sample(rng, share_rounds.len(), reveal_count)
        .into_iter()
        .map(|k| share_rounds[k])
        .collect();
    revealed.sort_unstable();
    transcript.push(PublicEvent::RevealRequested {
        positions: revealed.clone(),
    });

    let mut mismatches = 0;
    for &p in &revealed {
        let r = &mut records[p - 1];
        r.revealed = true;
        let xor = r.bob_bit.zip(r.charlie_bit).map(|(b, c)| b ^ c);
        if xor != r.alice_bit {
            r.error_flag = true;
            mismatches += 1;
        }
    }
    result.error_rates[0] = rate(mismatches, revealed.len());
    result.aborted = result.error_rates[0] > config.error_threshold;
    transcript.push(PublicEvent::RevealChecked {
        aborted: result.aborted,
    });

    if !result.aborted {
        result.secret_positions = share_rounds
            .into_iter()
            .filter(|p| revealed.binary_search(p).is_err())
            .collect();
        for &p in &result.secret_positions {
            let r = &records[p - 1];
            result
                .alice_secret
                .push(r.alice_bit.expect("case-1 round has Alice's bit"));
            result
                .reconstructed_secret
                .push(r.bob_bit.unwrap_or(0) ^ r.charlie_bit.unwrap_or(0));
        }
    }
    result.revealed_positions = revealed;
    result.records = records;
    result.transcript = transcript;
    result
}
