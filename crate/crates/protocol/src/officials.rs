//! Registration official and envelope printer duties.

use rand::{CryptoRng, RngCore};
use trip_core::{schnorr, Group, SigningKeypair};
use trip_ledger::{messages, Entry, EntryBody, EnvelopeIssued, Ledger, RegistrationSession, Role};

use crate::{CheckInTicket, CheckoutTicket, Clock, Envelope, ProtocolError};

/// Freshness window for check-in tickets, in seconds.
pub const DEFAULT_T_DELTA: u64 = 600;

/// Default envelope nonce length: λ = 128 bits.
pub const DEFAULT_NONCE_LEN: usize = 16;

/// Attests to a voter's identity and the current time.
pub fn checkin_issue<G: Group>(
    official: &SigningKeypair<G>,
    v_id: &str,
    clock: &dyn Clock,
    ledger: &Ledger<G>,
) -> Result<CheckInTicket<G>, ProtocolError> {
    if !ledger.on_roll(v_id) {
        return Err(ProtocolError::UnknownVoter(v_id.to_owned()));
    }
    let d = clock.now();
    let sig = official.sign(&messages::checkin(v_id, d));
    Ok(CheckInTicket { v_id: v_id.to_owned(), d, official: *official.public(), sig })
}

/// Kiosk-side ticket checks: accepted official, signature, freshness.
pub fn verify_ticket<G: Group>(
    ticket: &CheckInTicket<G>,
    officials: &[G::Element],
    t_delta: u64,
    now: u64,
) -> Result<(), ProtocolError> {
    if !officials.contains(&ticket.official) {
        return Err(ProtocolError::UnknownOfficial);
    }
    if !schnorr::verify(&ticket.official, &ticket.sig, &messages::checkin(&ticket.v_id, ticket.d)) {
        return Err(ProtocolError::BadSignature);
    }
    if ticket.d.saturating_add(t_delta) < now {
        return Err(ProtocolError::StaleTicket);
    }
    Ok(())
}

/// Prints an envelope without publishing it. Honest printers follow with
/// [`publish_envelope`]; [`envelope_print`] does both.
pub fn envelope_make<G: Group, R: RngCore + CryptoRng>(
    printer: &SigningKeypair<G>,
    nonce_len: usize,
    rng: &mut R,
) -> Envelope<G> {
    let mut challenge = vec![0; nonce_len];
    rng.fill_bytes(&mut challenge);
    let sig = printer.sign(&messages::envelope(&trip_core::hash(&challenge)));
    Envelope { printer: *printer.public(), challenge, sig }
}

/// Publishes `(P, H(c), σ_p)`. The entry's own signature is `σ_p`.
pub fn publish_envelope<G: Group>(envelope: &Envelope<G>, ledger: &Ledger<G>) -> Result<u64, ProtocolError> {
    let body = EntryBody::EnvelopeIssued(EnvelopeIssued { challenge_hash: envelope.challenge_hash() });
    Ok(ledger.append(Entry::new(envelope.printer, body, envelope.sig))?)
}

pub fn envelope_print<G: Group, R: RngCore + CryptoRng>(
    printer: &SigningKeypair<G>,
    nonce_len: usize,
    ledger: &Ledger<G>,
    rng: &mut R,
) -> Result<(Envelope<G>, u64), ProtocolError> {
    let envelope = envelope_make(printer, nonce_len, rng);
    let index = publish_envelope(&envelope, ledger)?;
    Ok((envelope, index))
}

/// Verifies a check-out ticket and publishes the registration session.
pub fn checkout_process<G: Group>(
    official: &SigningKeypair<G>,
    t_ot: &CheckoutTicket<G>,
    ledger: &Ledger<G>,
) -> Result<u64, ProtocolError> {
    if !ledger.has_role(&t_ot.kiosk, Role::Kiosk) {
        return Err(ProtocolError::UnknownKiosk);
    }
    if !schnorr::verify(&t_ot.kiosk, &t_ot.sig, &messages::kiosk_checkout(&t_ot.v_id, t_ot.d, &t_ot.v_e)) {
        return Err(ProtocolError::BadKioskSignature);
    }
    let session = RegistrationSession {
        v_id: t_ot.v_id.clone(),
        d: t_ot.d,
        v_e: t_ot.v_e,
        kiosk: t_ot.kiosk,
        kiosk_sig: t_ot.sig,
    };
    Ok(ledger.append(Entry::sign(official, EntryBody::RegistrationSession(session)))?)
}
