#include "ler/error.hpp"
#include "ler/protocol.hpp"

#include <algorithm>

namespace ler::protocol {

Json Envelope::to_json() const {
  return Json{{"payload", payload}, {"sender_did", sender_did}, {"session_id", session_id}, {"step", step}};
}

Envelope Envelope::from_json(const Json& j) {
  Envelope e;
  e.session_id = require_string(j, "session_id");
  e.step = static_cast<int>(require_int(j, "step"));
  e.payload = require(j, "payload");
  e.sender_did = require_string(j, "sender_did");
  return e;
}

FaultHook drop_fault() {
  return [](const Envelope&) { return std::vector<Envelope>{}; };
}

FaultHook replay_fault() {
  return [](const Envelope& e) { return std::vector<Envelope>{e, e}; };
}

FaultHook mutate_fault(std::function<void(Json&)> mutate) {
  return [mutate = std::move(mutate)](const Envelope& e) {
    Envelope copy = e;
    mutate(copy.payload);
    return std::vector<Envelope>{copy};
  };
}

std::vector<Envelope> InProcessTransport::send(const Envelope& message) {
  FaultHook fault;
  {
    std::lock_guard lock(mutex_);
    fault = fault_;
  }
  // Round-trip through the wire form so nothing but canonical text crosses.
  Envelope wire = Envelope::from_json(parse_document(canonical_serialize(message.to_json())));
  std::vector<Envelope> delivered = fault ? fault(wire) : std::vector<Envelope>{wire};
  std::lock_guard lock(mutex_);
  for (const auto& e : delivered) log_.push_back(canonical_serialize(e.to_json()));
  return delivered;
}

void InProcessTransport::set_fault(FaultHook hook) {
  std::lock_guard lock(mutex_);
  fault_ = std::move(hook);
}

void InProcessTransport::clear_fault() {
  std::lock_guard lock(mutex_);
  fault_ = nullptr;
}

std::vector<std::string> InProcessTransport::log() const {
  std::lock_guard lock(mutex_);
  return log_;
}

NonceRegistry::NonceRegistry(Seconds ttl, std::shared_ptr<RandomSource> rng) : ttl_(ttl), rng_(std::move(rng)) {
  if (ttl_ <= 0) throw Error(Errc::InvalidArgument, "nonce ttl must be positive");
}

Bytes NonceRegistry::issue(const std::string& session_id, Timestamp now) {
  Bytes nonce = rng_->bytes(32);
  std::lock_guard lock(mutex_);
  entries_[session_id] = Entry{nonce, now, false};
  return nonce;
}

std::optional<Bytes> NonceRegistry::outstanding(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(session_id);
  if (it == entries_.end() || it->second.used) return std::nullopt;
  return it->second.nonce;
}

bool NonceRegistry::consume(const std::string& session_id, std::span<const std::uint8_t> nonce, Timestamp now) {
  std::lock_guard lock(mutex_);
  auto it = entries_.find(session_id);
  if (it == entries_.end()) return false;
  Entry& e = it->second;
  if (e.used || !std::ranges::equal(e.nonce, nonce) || now < e.issued_at || now - e.issued_at > ttl_) return false;
  e.used = true;
  return true;
}

void Session::advance(int step) {
  if (step < 1 || step > 6) throw Error(Errc::SessionState, "step " + std::to_string(step) + " out of range");
  if (step < step_) {
    throw Error(Errc::SessionState, "session " + id_ + " is at step " + std::to_string(step_) + ", cannot go back to " +
                                        std::to_string(step));
  }
  step_ = step;
}

void Session::record(const Envelope& message) {
  advance(message.step);
  transcript_.push_back(message);
}

} // namespace ler::protocol
