#include "backcache/aes.hpp"

namespace backcache::aes {

namespace {

constexpr std::uint8_t xtime(std::uint8_t x) {
  return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0x00));
}

constexpr std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
  std::uint8_t r = 0;
  while (b) {
    if (b & 1) r ^= a;
    a = xtime(a);
    b >>= 1;
  }
  return r;
}

constexpr std::array<std::uint8_t, 256> make_sbox() {
  std::array<std::uint8_t, 256> box{};
  for (int x = 0; x < 256; ++x) {
    // Multiplicative inverse by exhaustive search; 0 maps to 0.
    std::uint8_t inv = 0;
    for (int y = 1; y < 256 && x != 0; ++y) {
      if (gf_mul(static_cast<std::uint8_t>(x), static_cast<std::uint8_t>(y)) == 1) {
        inv = static_cast<std::uint8_t>(y);
        break;
      }
    }
    std::uint8_t s = inv;
    std::uint8_t r = inv;
    for (int i = 0; i < 4; ++i) {
      r = static_cast<std::uint8_t>((r << 1) | (r >> 7));
      s ^= r;
    }
    box[static_cast<std::size_t>(x)] = static_cast<std::uint8_t>(s ^ 0x63);
  }
  return box;
}

const std::array<std::uint8_t, 256>& sbox() {
  static const auto box = make_sbox();
  return box;
}

using RoundKeys = std::array<Block, 11>;

RoundKeys expand_key(const Block& key) {
  RoundKeys rk{};
  rk[0] = key;
  std::uint8_t rcon = 1;
  for (int r = 1; r <= 10; ++r) {
    const Block& prev = rk[static_cast<std::size_t>(r - 1)];
    Block& cur = rk[static_cast<std::size_t>(r)];
    std::array<std::uint8_t, 4> t{sbox()[prev[13]], sbox()[prev[14]], sbox()[prev[15]],
                                  sbox()[prev[12]]};
    t[0] ^= rcon;
    rcon = xtime(rcon);
    for (int i = 0; i < 16; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      const std::uint8_t w = i < 4 ? t[ui] : cur[ui - 4];
      cur[ui] = prev[ui] ^ w;
    }
  }
  return rk;
}

void add_round_key(Block& s, const Block& k) {
  for (std::size_t i = 0; i < 16; ++i) s[i] ^= k[i];
}

// State byte i sits at row i % 4, column i / 4.
void round_transform(Block& s, bool mix) {
  Block t{};
  for (std::size_t c = 0; c < 4; ++c) {
    for (std::size_t r = 0; r < 4; ++r) t[4 * c + r] = sbox()[s[4 * ((c + r) % 4) + r]];
  }
  if (mix) {
    for (std::size_t c = 0; c < 4; ++c) {
      const std::uint8_t a0 = t[4 * c], a1 = t[4 * c + 1], a2 = t[4 * c + 2], a3 = t[4 * c + 3];
      t[4 * c] = static_cast<std::uint8_t>(xtime(a0) ^ (xtime(a1) ^ a1) ^ a2 ^ a3);
      t[4 * c + 1] = static_cast<std::uint8_t>(a0 ^ xtime(a1) ^ (xtime(a2) ^ a2) ^ a3);
      t[4 * c + 2] = static_cast<std::uint8_t>(a0 ^ a1 ^ xtime(a2) ^ (xtime(a3) ^ a3));
      t[4 * c + 3] = static_cast<std::uint8_t>((xtime(a0) ^ a0) ^ a1 ^ a2 ^ xtime(a3));
    }
  }
  s = t;
}

}  // namespace

Block encrypt(const Block& key, const Block& plaintext) {
  const RoundKeys rk = expand_key(key);
  Block s = plaintext;
  add_round_key(s, rk[0]);
  for (std::size_t r = 1; r <= 10; ++r) {
    round_transform(s, r != 10);
    add_round_key(s, rk[r]);
  }
  return s;
}

std::vector<std::uint8_t> ttable_lines(const Block& key, const Block& plaintext,
                                       bool full_rounds) {
  const RoundKeys rk = expand_key(key);
  Block s = plaintext;
  add_round_key(s, rk[0]);
  const std::size_t rounds = full_rounds ? 10 : 1;
  std::vector<std::uint8_t> lines;
  lines.reserve(16 * rounds);
  for (std::size_t r = 1; r <= rounds; ++r) {
    for (std::size_t i = 0; i < 16; ++i) {
      lines.push_back(static_cast<std::uint8_t>((i % 4) * 16 + (s[i] >> 4)));
    }
    round_transform(s, r != 10);
    add_round_key(s, rk[r]);
  }
  return lines;
}

}  // namespace backcache::aes
