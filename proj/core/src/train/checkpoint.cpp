#include "oucd/train/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "oucd/common/error.hpp"

namespace oucd {
namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

constexpr char kMagic[4] = {'O', 'U', 'C', 'D'};
constexpr std::string_view kMomentPrefix = "adam.";

class Writer {
public:
    template <typename V>
    void pod(V v) {
        const auto* p = reinterpret_cast<const std::uint8_t*>(&v);
        out_.insert(out_.end(), p, p + sizeof(V));
    }
    void str(const std::string& s) {
        pod(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void record(const ParamRecord& r) {
        str(r.name);
        pod<std::int32_t>(r.shape.n);
        pod<std::int32_t>(r.shape.c);
        pod<std::int32_t>(r.shape.h);
        pod<std::int32_t>(r.shape.w);
        const auto* p = reinterpret_cast<const std::uint8_t*>(r.data.data());
        out_.insert(out_.end(), p, p + r.data.size() * sizeof(float));
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    Reader(std::span<const std::uint8_t> bytes, std::string source)
        : bytes_(bytes), source_(std::move(source)) {}

    template <typename V>
    V pod(const std::string& what) {
        need(sizeof(V), what);
        V v;
        std::memcpy(&v, bytes_.data() + pos_, sizeof(V));
        pos_ += sizeof(V);
        return v;
    }
    std::string str(const std::string& what) {
        const auto len = pod<std::uint32_t>(what + " length");
        need(len, what);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), len);
        pos_ += len;
        return s;
    }
    ParamRecord record(std::uint64_t index) {
        const std::string label = "record " + std::to_string(index);
        ParamRecord r;
        r.name = str(label + " name");
        const std::string named = label + " (" + r.name + ")";
        r.shape.n = pod<std::int32_t>(named + " shape");
        r.shape.c = pod<std::int32_t>(named + " shape");
        r.shape.h = pod<std::int32_t>(named + " shape");
        r.shape.w = pod<std::int32_t>(named + " shape");
        if (!r.shape.valid()) {
            fail(named + ": invalid shape " + r.shape.str());
        }
        const std::size_t count = r.shape.numel();
        if (count > remaining() / sizeof(float)) {
            fail("truncated at " + named + " data");
        }
        r.data.resize(count);
        std::memcpy(r.data.data(), bytes_.data() + pos_, count * sizeof(float));
        pos_ += count * sizeof(float);
        return r;
    }
    [[nodiscard]] std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    [[noreturn]] void fail(const std::string& msg) const {
        throw CheckpointError(source_ + ": " + msg);
    }

private:
    void need(std::size_t n, const std::string& what) const {
        if (n > remaining()) {
            fail("truncated at " + what);
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::string source_;
    std::size_t pos_ = 0;
};

const ParamRecord* find_in(const std::vector<ParamRecord>& v, const std::string& name) {
    for (const auto& r : v) {
        if (r.name == name) {
            return &r;
        }
    }
    return nullptr;
}

} // namespace

const ParamRecord* CheckpointBundle::find_parameter(const std::string& name) const {
    return find_in(parameters, name);
}

const ParamRecord* CheckpointBundle::find_optimizer(const std::string& name) const {
    return find_in(optimizer, name);
}

std::vector<std::uint8_t> serialize_checkpoint(const CheckpointBundle& b) {
    Writer w;
    for (const char ch : kMagic) {
        w.pod(ch);
    }
    w.pod<std::uint32_t>(b.version);
    w.pod<std::uint64_t>(b.fingerprint);
    w.str(b.model_config);
    w.pod<std::int64_t>(b.epoch);
    w.pod<std::int64_t>(b.step);
    w.pod<double>(b.beta1);
    w.pod<double>(b.beta2);
    w.pod<double>(b.epsilon);
    w.pod<std::uint64_t>(b.adam_steps);
    w.str(b.rng_state);
    w.pod<std::uint64_t>(b.parameters.size() + b.optimizer.size());
    for (const auto& r : b.parameters) {
        w.record(r);
    }
    for (const auto& r : b.optimizer) {
        if (!r.name.starts_with(kMomentPrefix)) {
            throw ContractError("optimizer record '" + r.name + "' lacks the adam. prefix");
        }
        w.record(r);
    }
    return w.take();
}

CheckpointBundle deserialize_checkpoint(std::span<const std::uint8_t> bytes,
                                        const std::string& source) {
    Reader r(bytes, source);
    for (const char expected : kMagic) {
        if (r.pod<char>("header magic") != expected) {
            r.fail("bad magic (not an OUCD checkpoint)");
        }
    }
    CheckpointBundle b;
    b.version = r.pod<std::uint32_t>("header version");
    if (b.version != kCheckpointVersion) {
        r.fail("unsupported checkpoint version " + std::to_string(b.version) + " (supported: " +
               std::to_string(kCheckpointVersion) + ")");
    }
    b.fingerprint = r.pod<std::uint64_t>("header fingerprint");
    b.model_config = r.str("header model config");
    b.epoch = r.pod<std::int64_t>("header epoch");
    b.step = r.pod<std::int64_t>("header step");
    b.beta1 = r.pod<double>("header beta1");
    b.beta2 = r.pod<double>("header beta2");
    b.epsilon = r.pod<double>("header epsilon");
    b.adam_steps = r.pod<std::uint64_t>("header adam step count");
    b.rng_state = r.str("header rng state");
    const auto count = r.pod<std::uint64_t>("record count");
    for (std::uint64_t i = 0; i < count; ++i) {
        ParamRecord rec = r.record(i);
        (rec.name.starts_with(kMomentPrefix) ? b.optimizer : b.parameters).push_back(std::move(rec));
    }
    if (r.remaining() != 0) {
        r.fail(std::to_string(r.remaining()) + " trailing bytes after record " +
               std::to_string(count == 0 ? 0 : count - 1));
    }
    return b;
}

void save_checkpoint(const CheckpointBundle& bundle, const std::filesystem::path& path) {
    const auto bytes = serialize_checkpoint(bundle);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) {
        throw IoError(path.string() + ": cannot write checkpoint");
    }
}

CheckpointBundle load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw CheckpointError(path.string() + ": cannot open checkpoint");
    }
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)),
                                          std::istreambuf_iterator<char>());
    return deserialize_checkpoint(bytes, path.string());
}

} // namespace oucd
