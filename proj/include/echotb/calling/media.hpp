/*
 *    Copyright (c) 2026 The Echo Testbed Authors.
 *    All rights reserved.
 *
 *    Licensed under the Apache License, Version 2.0 (the "License");
 *    you may not use this file except in compliance with the License.
 *    You may obtain a copy of the License at
 *
 *        http://www.apache.org/licenses/LICENSE-2.0
 *
 *    Unless required by applicable law or agreed to in writing, software
 *    distributed under the License is distributed on an "AS IS" BASIS,
 *    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *    See the License for the specific language governing permissions and
 *    limitations under the License.
 */

#pragma once

#include "echotb/crypto/srtp.hpp"
#include "echotb/netsim/fabric.hpp"
#include "echotb/wire/sdp.hpp"

#include <optional>
#include <string>
#include <vector>

namespace echotb::calling {

inline constexpr std::uint64_t kFrameIntervalMs = 20;
inline constexpr std::size_t kFrameBytes = 160;

enum class PathKind { direct, relay, gateway };
using echotb::to_string;
std::string_view to_string(PathKind p) noexcept;

struct MediaStats {
  std::size_t sent = 0;
  std::size_t received = 0;
  std::size_t auth_drops = 0;
  std::size_t replay_drops = 0;
  std::size_t other_drops = 0;
};

std::uint32_t ssrc_of(const wire::SdpBody& sdp) noexcept;

// Synthetic 160-byte frame starting with a recognisable canary.
Bytes canary_frame(const std::string& owner, std::size_t index);

// Peer host candidate if reachable from `host`, else the relay candidate.
// Gateway legs always send to the gateway's host candidate.
struct PathChoice {
  PathKind kind = PathKind::relay;
  netsim::Endpoint target;
};
PathChoice select_path(const netsim::Fabric& fabric, const netsim::HostId& host, const wire::SdpBody& remote,
                       bool gateway_leg);

/// One call's media in both directions. The send context is keyed from our
/// own SDP crypto line, the receive context from the peer's.
class MediaSession {
 public:
  MediaSession(netsim::Fabric& fabric, netsim::HostId host, std::uint16_t local_port, const wire::SdpBody& local,
               const wire::SdpBody& remote, PathChoice path);
  ~MediaSession();
  MediaSession(const MediaSession&) = delete;
  MediaSession& operator=(const MediaSession&) = delete;

  // Throws Error(torn_down) once stopped.
  void send_frame(ByteView payload);
  // Re-sends the last protected packet verbatim (replay probe).
  void resend_last();
  void stop();

  bool active() const noexcept { return active_; }
  const PathChoice& path() const noexcept { return path_; }
  const MediaStats& stats() const noexcept { return stats_; }
  const std::vector<Bytes>& received() const noexcept { return received_; }
  const std::vector<Bytes>& sent_packets() const noexcept { return sent_packets_; }

 private:
  void on_datagram(const Bytes& data);

  netsim::Fabric& fabric_;
  netsim::HostId host_;
  std::uint16_t port_;
  PathChoice path_;
  crypto::SrtpContext send_;
  crypto::SrtpContext recv_;
  std::uint32_t timestamp_ = 0;
  bool active_ = true;
  MediaStats stats_;
  std::vector<Bytes> received_;
  std::vector<Bytes> sent_packets_;
};

}  // namespace echotb::calling
