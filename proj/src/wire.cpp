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

#include "rehear/wire.hpp"

#include "rehear/errors.hpp"
#include "rehear/prompts.hpp"

#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace rehear::wire {

using nlohmann::json;

namespace {

[[noreturn]] void protocol_fail(const std::string& what, const std::string& raw) {
    throw ProtocolError(what + "; offending message: " + raw);
}

const json& require_field(const json& msg, const char* field) {
    if (!msg.contains(field))
        protocol_fail(std::string("reply missing required field '") + field + "'", msg.dump());
    return msg.at(field);
}

std::vector<std::string> string_list(const json& value, const json& msg, const char* field) {
    if (!value.is_array()) protocol_fail(std::string("field '") + field + "' must be an array",
                                         msg.dump());
    std::vector<std::string> out;
    for (const auto& item : value) {
        if (!item.is_string())
            protocol_fail(std::string("field '") + field + "' must contain strings", msg.dump());
        out.push_back(item.get<std::string>());
    }
    return out;
}

}  // namespace

json audio_ref_to_json(const corpus::AudioRef& audio) {
    if (audio.is_external()) return json{{"path", audio.path}};
    return json{{"symbols", audio.symbols}};
}

PeerConnection::PeerConnection(const EndpointSpec& spec) : timeout_ms_(spec.timeout_ms) {
    if (spec.command.empty()) throw ProtocolError("external backend: empty command line");

    int to_child[2];   // parent writes, child reads
    int from_child[2]; // child writes, parent reads
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw ProtocolError("external backend: pipe() failed: " + std::string(strerror(errno)));

    const pid_t pid = fork();
    if (pid < 0) throw ProtocolError("external backend: fork() failed");
    if (pid == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        std::vector<char*> argv;
        argv.reserve(spec.command.size() + 1);
        for (const auto& arg : spec.command) argv.push_back(const_cast<char*>(arg.c_str()));
        argv.push_back(nullptr);
        execvp(argv[0], argv.data());
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    stdin_fd_ = to_child[1];
    stdout_fd_ = from_child[0];
    pid_ = pid;

    const uint64_t id = next_id();
    json reply = roundtrip(json{{"type", "hello"}, {"id", id}});
    if (require_field(reply, "type").get<std::string>() != "hello")
        protocol_fail("expected hello reply", reply.dump());
    capabilities_.roles = string_list(require_field(reply, "roles"), reply, "roles");
    capabilities_.modes = string_list(require_field(reply, "modes"), reply, "modes");
}

PeerConnection::~PeerConnection() {
    if (stdin_fd_ >= 0) {
        try {
            send_line(json{{"type", "shutdown"}, {"id", next_id()}}.dump());
        } catch (...) {
            // Peer already gone; reap below.
        }
        close(stdin_fd_);
    }
    if (stdout_fd_ >= 0) close(stdout_fd_);
    if (pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 50; ++i) {
            if (waitpid(static_cast<pid_t>(pid_), &status, WNOHANG) != 0) return;
            usleep(10 * 1000);
        }
        kill(static_cast<pid_t>(pid_), SIGKILL);
        waitpid(static_cast<pid_t>(pid_), &status, 0);
    }
}

void PeerConnection::send_line(const std::string& line) {
    std::string framed = line;
    framed.push_back('\n');
    size_t off = 0;
    while (off < framed.size()) {
        const ssize_t n = write(stdin_fd_, framed.data() + off, framed.size() - off);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError("external backend: write failed: " + std::string(strerror(errno)));
        }
        off += static_cast<size_t>(n);
    }
}

std::string PeerConnection::read_line() {
    for (;;) {
        const size_t newline = read_buffer_.find('\n');
        if (newline != std::string::npos) {
            std::string line = read_buffer_.substr(0, newline);
            read_buffer_.erase(0, newline + 1);
            return line;
        }
        struct pollfd pfd{stdout_fd_, POLLIN, 0};
        const int rc = poll(&pfd, 1, timeout_ms_);
        if (rc == 0) throw ProtocolError("external backend: timeout waiting for reply");
        if (rc < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError("external backend: poll failed: " + std::string(strerror(errno)));
        }
        char buf[4096];
        const ssize_t n = read(stdout_fd_, buf, sizeof(buf));
        if (n == 0) throw ProtocolError("external backend: peer closed the stream");
        if (n < 0) {
            if (errno == EINTR) continue;
            throw ProtocolError("external backend: read failed: " + std::string(strerror(errno)));
        }
        read_buffer_.append(buf, static_cast<size_t>(n));
    }
}

uint64_t PeerConnection::send_request(json request) {
    std::lock_guard<std::mutex> lock(mutex_);
    const uint64_t id = request.at("id").get<uint64_t>();
    send_line(request.dump());
    return id;
}

json PeerConnection::await_reply(uint64_t want_id) {
    std::lock_guard<std::mutex> lock(mutex_);
    for (;;) {
        for (size_t i = 0; i < parked_.size(); ++i) {
            if (parked_[i].at("id").get<uint64_t>() == want_id) {
                json reply = std::move(parked_[i]);
                parked_.erase(parked_.begin() + static_cast<long>(i));
                return reply;
            }
        }
        const std::string line = read_line();
        json reply;
        try {
            reply = json::parse(line);
        } catch (const json::exception&) {
            protocol_fail("malformed reply (not valid JSON)", line);
        }
        if (!reply.is_object() || !reply.contains("id") ||
            !reply.at("id").is_number_unsigned())
            protocol_fail("reply missing required field 'id'", line);
        if (require_field(reply, "type").get<std::string>() == "error") {
            protocol_fail("peer error: " + require_field(reply, "message").get<std::string>(),
                          line);
        }
        if (reply.at("id").get<uint64_t>() == want_id) return reply;
        parked_.push_back(std::move(reply));
    }
}

json PeerConnection::roundtrip(json request) {
    const uint64_t id = send_request(std::move(request));
    return await_reply(id);
}

ExternalRecognizer::ExternalRecognizer(std::shared_ptr<PeerConnection> peer)
    : peer_(std::move(peer)) {
    const auto& roles = peer_->capabilities().roles;
    if (std::find(roles.begin(), roles.end(), "recognizer") == roles.end())
        throw ProtocolError("external backend does not advertise the recognizer role");
}

backends::Hypothesis ExternalRecognizer::transcribe(const corpus::AudioRef& audio,
                                                    uint64_t /*rng_key*/) const {
    json reply = peer_->roundtrip(json{{"type", "transcribe"},
                                       {"id", peer_->next_id()},
                                       {"audio_ref", audio_ref_to_json(audio)}});
    if (require_field(reply, "type").get<std::string>() != "result")
        throw ProtocolError("transcribe: expected result; offending message: " + reply.dump());
    textnorm::TokenSeq tokens{ require_field(reply, "tokens").get<std::vector<std::string>>() };
    std::vector<double> confidences;
    if (reply.contains("token_confidences"))
        confidences = reply.at("token_confidences").get<std::vector<double>>();
    else
        confidences.assign(tokens.size(), 1.0);
    if (confidences.size() != tokens.size())
        throw ProtocolError("transcribe: token_confidences length mismatch; offending message: " +
                            reply.dump());
    return backends::Hypothesis::from_confidences(std::move(tokens), std::move(confidences));
}

void ExternalRecognizer::train(const std::vector<backends::TrainingPair>& examples, double eta,
                               int epochs) {
    json ex = json::array();
    for (const auto& e : examples) {
        ex.push_back(json{{"audio_ref", audio_ref_to_json(e.audio)},
                          {"target", e.target.tokens},
                          {"weight", e.weight}});
    }
    json reply = peer_->roundtrip(json{{"type", "train"},
                                       {"id", peer_->next_id()},
                                       {"role", "recognizer"},
                                       {"eta", eta},
                                       {"epochs", epochs},
                                       {"examples", std::move(ex)}});
    if (require_field(reply, "type").get<std::string>() != "result")
        throw ProtocolError("train: expected result; offending message: " + reply.dump());
}

ExternalCorrector::ExternalCorrector(std::shared_ptr<PeerConnection> peer,
                                     backends::CorrectorMode mode)
    : peer_(std::move(peer)), mode_(mode) {
    const auto& caps = peer_->capabilities();
    if (std::find(caps.roles.begin(), caps.roles.end(), "corrector") == caps.roles.end())
        throw ProtocolError("external backend does not advertise the corrector role");
    const std::string mode_name(backends::to_string(mode));
    if (std::find(caps.modes.begin(), caps.modes.end(), mode_name) == caps.modes.end())
        throw ProtocolError("external backend does not support mode " + mode_name);
}

textnorm::TokenSeq ExternalCorrector::correct(const std::optional<corpus::AudioRef>& audio,
                                              const backends::Hypothesis& hyp,
                                              uint64_t /*rng_key*/) const {
    if (mode_ == backends::CorrectorMode::audio_aware && !audio.has_value())
        throw ValidationError("external corrector: audio_aware mode requires audio");
    const std::string hyp_text = textnorm::render_chars(hyp.tokens);
    const std::string_view tpl = mode_ == backends::CorrectorMode::audio_aware
                                     ? prompts::kAudioAware
                                     : prompts::kTextOnly;
    json request{{"type", "correct"},
                 {"id", peer_->next_id()},
                 {"prompt", prompts::render(tpl, hyp_text)},
                 {"hypothesis", hyp_text}};
    if (mode_ == backends::CorrectorMode::audio_aware)
        request["audio_ref"] = audio_ref_to_json(*audio);
    json reply = peer_->roundtrip(std::move(request));
    if (require_field(reply, "type").get<std::string>() != "result")
        throw ProtocolError("correct: expected result; offending message: " + reply.dump());
    return textnorm::TokenSeq{require_field(reply, "tokens").get<std::vector<std::string>>()};
}

void ExternalCorrector::train(const std::vector<backends::CorrectionTriplet>& triplets) {
    json ex = json::array();
    for (const auto& t : triplets) {
        ex.push_back(json{{"audio_ref", audio_ref_to_json(t.audio)},
                          {"hypothesis", t.hypothesis.tokens.tokens},
                          {"target", t.truth.tokens}});
    }
    json reply = peer_->roundtrip(json{{"type", "train"},
                                       {"id", peer_->next_id()},
                                       {"role", "corrector"},
                                       {"examples", std::move(ex)}});
    if (require_field(reply, "type").get<std::string>() != "result")
        throw ProtocolError("train: expected result; offending message: " + reply.dump());
}

}  // namespace rehear::wire
