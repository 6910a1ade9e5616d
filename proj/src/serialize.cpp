#include "fhesw/serialize.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "fhesw/common.hpp"

namespace fhesw {

namespace {

constexpr char kMagic[4] = {'F', 'H', 'S', 'W'};

class Writer {
 public:
  explicit Writer(ObjectTag tag) {
    out_.insert(out_.end(), kMagic, kMagic + 4);
    u16(kFormatVersion);
    u16(static_cast<std::uint16_t>(tag));
  }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64v(std::uint64_t v) { le(v, 8); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v), 8); }

  template <typename T>
  void array(const std::vector<T>& v) {
    u64v(v.size());
    for (const T& x : v) le(static_cast<std::uint64_t>(x), sizeof(T));
  }

  void poly(const RnsPoly& p) {
    u64v(p.degree());
    u8(p.domain() == Domain::Eval ? 1 : 0);
    u64v(p.level());
    for (std::size_t i = 0; i < p.level(); ++i) u64v(p.basis()[i].value());
    u64v(p.degree() * p.level());
    for (std::size_t i = 0; i < p.level(); ++i) {
      for (u64 x : p.residues(i)) u64v(x);
    }
  }

  void lwe(const LweCiphertext& ct) {
    array(ct.a);
    u32(ct.b);
  }

  Bytes take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }

  Bytes out_;
};

class Reader {
 public:
  Reader(const Bytes& in, ObjectTag expect) : in_(in) {
    if (in_.size() < 8 || std::memcmp(in_.data(), kMagic, 4) != 0) {
      throw Error(ErrorCode::FormatError, "missing FHSW header");
    }
    pos_ = 4;
    if (u16() != kFormatVersion) throw Error(ErrorCode::FormatError, "unsupported format version");
    if (u16() != static_cast<std::uint16_t>(expect)) {
      throw Error(ErrorCode::FormatError, "unexpected object type");
    }
  }

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64v() { return le(8); }
  double f64() { return std::bit_cast<double>(le(8)); }

  template <typename T>
  std::vector<T> array() {
    const std::uint64_t n = u64v();
    need(n, sizeof(T));
    std::vector<T> v(n);
    for (auto& x : v) x = static_cast<T>(le(sizeof(T)));
    return v;
  }

  RnsPoly poly(const CkksContext& ctx) {
    const std::uint64_t n = u64v();
    const Domain domain = u8() ? Domain::Eval : Domain::Coeff;
    const std::uint64_t level = u64v();
    if (n != ctx.degree() || level == 0 || level > ctx.max_level() + 1) {
      throw Error(ErrorCode::ParamMismatch, "polynomial shape differs from the context");
    }
    const RnsBasis basis = ctx.basis_at(level);
    for (std::size_t i = 0; i < level; ++i) {
      if (u64v() != basis[i].value()) throw Error(ErrorCode::ParamMismatch, "prime differs from the context");
    }
    if (u64v() != n * level) throw Error(ErrorCode::FormatError, "residue count");
    need(n * level, 8);
    RnsPoly p(n, basis, domain);
    for (std::size_t i = 0; i < level; ++i) {
      for (auto& x : p.residues(i)) {
        x = u64v();
        if (x >= basis[i].value()) throw Error(ErrorCode::FormatError, "residue out of range");
      }
    }
    return p;
  }

  LweCiphertext lwe() {
    LweCiphertext ct;
    ct.a = array<Torus>();
    ct.b = u32();
    return ct;
  }

  void finish() const {
    if (pos_ != in_.size()) throw Error(ErrorCode::FormatError, "trailing bytes");
  }

 private:
  void need(std::uint64_t count, std::size_t width) const {
    if (count > (in_.size() - pos_) / width) throw Error(ErrorCode::FormatError, "truncated data");
  }

  std::uint64_t le(int bytes) {
    need(1, bytes);
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in_[pos_ + i]) << (8 * i);
    pos_ += bytes;
    return v;
  }

  const Bytes& in_;
  std::size_t pos_ = 0;
};

void write_ksk(Writer& w, const KeySwitchKey& k) {
  w.u64v(k.b.size());
  for (std::size_t i = 0; i < k.b.size(); ++i) {
    w.poly(k.b[i]);
    w.poly(k.a[i]);
  }
}

KeySwitchKey read_ksk(Reader& r, const CkksContext& ctx) {
  KeySwitchKey k;
  const std::uint64_t rows = r.u64v();
  if (rows > ctx.max_level()) throw Error(ErrorCode::FormatError, "too many key-switch rows");
  for (std::uint64_t i = 0; i < rows; ++i) {
    k.b.push_back(r.poly(ctx));
    k.a.push_back(r.poly(ctx));
  }
  return k;
}

}  // namespace

ObjectTag peek_tag(const Bytes& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::FormatError, "missing FHSW header");
  }
  return static_cast<ObjectTag>(bytes[6] | (bytes[7] << 8));
}

Bytes serialize(const CkksCiphertext& ct) {
  Writer w(ObjectTag::CkksCiphertext);
  w.f64(ct.scale);
  w.u64v(ct.slots);
  w.poly(ct.b);
  w.poly(ct.a);
  return w.take();
}

Bytes serialize(const CkksPlaintext& pt) {
  Writer w(ObjectTag::CkksPlaintext);
  w.f64(pt.scale);
  w.u64v(pt.slots);
  w.poly(pt.poly);
  return w.take();
}

Bytes serialize(const CkksSecretKey& sk) {
  Writer w(ObjectTag::CkksSecretKey);
  w.array(sk.coeffs);
  w.poly(sk.eval);
  return w.take();
}

Bytes serialize(const KeySwitchKey& k) {
  Writer w(ObjectTag::KeySwitchKey);
  write_ksk(w, k);
  return w.take();
}

Bytes serialize(const GaloisKeys& k) {
  Writer w(ObjectTag::GaloisKeys);
  w.u64v(k.by_step.size());
  for (const auto& [step, key] : k.by_step) {
    w.u64v(step);
    write_ksk(w, key);
  }
  return w.take();
}

Bytes serialize(const LweCiphertext& ct) {
  Writer w(ObjectTag::LweCiphertext);
  w.lwe(ct);
  return w.take();
}

Bytes serialize(const LweKey& k) {
  Writer w(ObjectTag::LweKey);
  w.array(k.s);
  return w.take();
}

Bytes serialize(const TlweKey& k) {
  Writer w(ObjectTag::TlweKey);
  w.array(k.s);
  return w.take();
}

Bytes serialize(const ExtractedBatch& b) {
  Writer w(ObjectTag::ExtractedBatch);
  w.u64v(b.size());
  for (const auto& ct : b.cts) w.lwe(ct);
  return w.take();
}

Bytes serialize(const BootstrapKey& k) {
  Writer w(ObjectTag::BootstrapKey);
  w.u64v(k.size());
  for (const auto& g : k.rows) {
    w.u64v(g.levels);
    for (std::size_t r = 0; r < g.b.size(); ++r) {
      w.array(g.b[r]);
      w.array(g.a[r]);
    }
  }
  return w.take();
}

Bytes serialize(const LweKeySwitchKey& k) {
  Writer w(ObjectTag::LweKeySwitchKey);
  w.u64v(k.n_in);
  w.u64v(k.n_out);
  w.u32(k.base_log);
  w.u64v(k.levels);
  w.array(k.a);
  w.array(k.b);
  return w.take();
}

CkksCiphertext load_ckks_ciphertext(const Bytes& bytes, const CkksContext& ctx) {
  Reader r(bytes, ObjectTag::CkksCiphertext);
  CkksCiphertext ct;
  ct.scale = r.f64();
  ct.slots = r.u64v();
  ct.b = r.poly(ctx);
  ct.a = r.poly(ctx);
  r.finish();
  if (!(ct.b.basis() == ct.a.basis())) throw Error(ErrorCode::FormatError, "ciphertext halves differ");
  return ct;
}

CkksPlaintext load_ckks_plaintext(const Bytes& bytes, const CkksContext& ctx) {
  Reader r(bytes, ObjectTag::CkksPlaintext);
  CkksPlaintext pt;
  pt.scale = r.f64();
  pt.slots = r.u64v();
  pt.poly = r.poly(ctx);
  r.finish();
  return pt;
}

CkksSecretKey load_ckks_secret_key(const Bytes& bytes, const CkksContext& ctx) {
  Reader r(bytes, ObjectTag::CkksSecretKey);
  CkksSecretKey sk;
  sk.coeffs = r.array<std::int64_t>();
  sk.eval = r.poly(ctx);
  r.finish();
  return sk;
}

KeySwitchKey load_key_switch_key(const Bytes& bytes, const CkksContext& ctx) {
  Reader r(bytes, ObjectTag::KeySwitchKey);
  KeySwitchKey k = read_ksk(r, ctx);
  r.finish();
  return k;
}

GaloisKeys load_galois_keys(const Bytes& bytes, const CkksContext& ctx) {
  Reader r(bytes, ObjectTag::GaloisKeys);
  GaloisKeys k;
  const std::uint64_t count = r.u64v();
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t step = r.u64v();
    k.by_step[step] = read_ksk(r, ctx);
  }
  r.finish();
  return k;
}

LweCiphertext load_lwe_ciphertext(const Bytes& bytes) {
  Reader r(bytes, ObjectTag::LweCiphertext);
  LweCiphertext ct = r.lwe();
  r.finish();
  return ct;
}

LweKey load_lwe_key(const Bytes& bytes) {
  Reader r(bytes, ObjectTag::LweKey);
  LweKey k{r.array<std::int64_t>()};
  r.finish();
  return k;
}

TlweKey load_tlwe_key(const Bytes& bytes) {
  Reader r(bytes, ObjectTag::TlweKey);
  TlweKey k{r.array<std::int64_t>()};
  r.finish();
  return k;
}

ExtractedBatch load_batch(const Bytes& bytes) {
  Reader r(bytes, ObjectTag::ExtractedBatch);
  ExtractedBatch b;
  const std::uint64_t n = r.u64v();
  for (std::uint64_t i = 0; i < n; ++i) b.cts.push_back(r.lwe());
  r.finish();
  return b;
}

BootstrapKey load_bootstrap_key(const Bytes& bytes) {
  Reader r(bytes, ObjectTag::BootstrapKey);
  BootstrapKey k;
  const std::uint64_t n = r.u64v();
  for (std::uint64_t i = 0; i < n; ++i) {
    RgswCiphertext g;
    g.levels = r.u64v();
    if (g.levels == 0 || g.levels > 64) throw Error(ErrorCode::FormatError, "gadget levels");
    for (std::size_t row = 0; row < 2 * g.levels; ++row) {
      g.b.push_back(r.array<u64>());
      g.a.push_back(r.array<u64>());
    }
    k.rows.push_back(std::move(g));
  }
  r.finish();
  return k;
}

LweKeySwitchKey load_keyswitch_key(const Bytes& bytes) {
  Reader r(bytes, ObjectTag::LweKeySwitchKey);
  LweKeySwitchKey k;
  k.n_in = r.u64v();
  k.n_out = r.u64v();
  k.base_log = r.u32();
  k.levels = r.u64v();
  k.a = r.array<Torus>();
  k.b = r.array<Torus>();
  r.finish();
  if (k.a.size() != k.n_in * k.levels * k.n_out || k.b.size() != k.n_in * k.levels) {
    throw Error(ErrorCode::FormatError, "key-switch key shape");
  }
  return k;
}

void write_file(const std::filesystem::path& path, const Bytes& bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return Bytes(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace fhesw
