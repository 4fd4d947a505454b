// Copyright 2026 The ReHear Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "rehear/backends.hpp"

#include <json.hpp>

#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace rehear::wire {

// Line-delimited JSON protocol spoken with a recognizer/corrector child
// process over its standard streams. One JSON object per line.
//
// Message kinds:
//   hello      {type, id}                      -> hello {type, id, roles[], modes[]}
//   transcribe {type, id, audio_ref}           -> result {type, id, tokens[], token_confidences[]?}
//   correct    {type, id, audio_ref?, prompt, hypothesis}
//                                              -> result {type, id, tokens[]}
//   train      {type, id, role, examples[]}    -> result {type, id, tokens: []}
//   error      {type, id, message}             (peer-initiated failure reply)
//   shutdown   {type, id}                      (no reply; parent then closes stdin)
//
// Request ids increase monotonically per connection; replies may arrive in
// any order but must echo the id. Prompts are rendered from the templates
// in prompts.hpp before sending and must reach the peer byte-identical.
struct EndpointSpec {
    std::vector<std::string> command;  // argv of the child process
    int timeout_ms = 30000;
    backends::CorrectorMode corrector_mode = backends::CorrectorMode::audio_aware;
};

struct PeerCapabilities {
    std::vector<std::string> roles;  // subset of {recognizer, corrector}
    std::vector<std::string> modes;  // subset of {audio_aware, text_only}
};

class PeerConnection {
public:
    explicit PeerConnection(const EndpointSpec& spec);
    ~PeerConnection();

    PeerConnection(const PeerConnection&) = delete;
    PeerConnection& operator=(const PeerConnection&) = delete;

    const PeerCapabilities& capabilities() const { return capabilities_; }

    // Requests may be pipelined: send several, then await each id. Replies
    // for other in-flight ids are parked until their await. Throws
    // ProtocolError on timeout, malformed replies, or peer-reported errors,
    // always quoting the offending message.
    uint64_t send_request(nlohmann::json request);  // request must carry "id"
    nlohmann::json await_reply(uint64_t id);
    nlohmann::json roundtrip(nlohmann::json request);

    uint64_t next_id() { return next_id_++; }

private:
    void send_line(const std::string& line);
    std::string read_line();

    int stdin_fd_ = -1;
    int stdout_fd_ = -1;
    long pid_ = -1;
    int timeout_ms_;
    uint64_t next_id_ = 1;
    std::string read_buffer_;
    std::vector<nlohmann::json> parked_;
    std::mutex mutex_;
    PeerCapabilities capabilities_;
};

nlohmann::json audio_ref_to_json(const corpus::AudioRef& audio);

class ExternalRecognizer : public backends::Recognizer {
public:
    explicit ExternalRecognizer(std::shared_ptr<PeerConnection> peer);

    backends::Hypothesis transcribe(const corpus::AudioRef& audio,
                                    uint64_t rng_key) const override;
    void train(const std::vector<backends::TrainingPair>& examples, double eta,
               int epochs) override;

private:
    std::shared_ptr<PeerConnection> peer_;
};

class ExternalCorrector : public backends::Corrector {
public:
    ExternalCorrector(std::shared_ptr<PeerConnection> peer, backends::CorrectorMode mode);

    textnorm::TokenSeq correct(const std::optional<corpus::AudioRef>& audio,
                               const backends::Hypothesis& hyp, uint64_t rng_key) const override;
    void train(const std::vector<backends::CorrectionTriplet>& triplets) override;

private:
    std::shared_ptr<PeerConnection> peer_;
    backends::CorrectorMode mode_;
};

}  // namespace rehear::wire
