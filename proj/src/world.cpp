#include "wildfire/world.hpp"

#include <cstring>
#include <istream>
#include <ostream>

#include "wildfire/rng.hpp"

namespace wildfire {

std::string to_string(Cell c)
{
    return "(" + std::to_string(c.x) + ", " + std::to_string(c.y) + ")";
}

std::string_view land_name(LandType t)
{
    switch (t) {
    case LandType::Brush: return "brush";
    case LandType::LightForest: return "light forest";
    case LandType::MediumForest: return "medium forest";
    case LandType::DenseForest: return "dense forest";
    case LandType::Rock: return "rock";
    case LandType::Water: return "water";
    case LandType::Building: return "building";
    }
    return "unknown";
}

std::string_view fire_name(FireState s)
{
    switch (s) {
    case FireState::None: return "none";
    case FireState::Ignited: return "ignited";
    case FireState::Burning: return "burning";
    case FireState::Extinguishing: return "extinguishing";
    case FireState::Extinguished: return "extinguished";
    }
    return "unknown";
}

WorldMap::WorldMap(int w, int h, std::uint64_t s) : width(w), height(h), seed(s)
{
    if (w < 1 || h < 1) {
        throw DimensionError("world dimensions must be at least 1x1");
    }
    const auto n = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
    land.assign(n, LandType::Brush);
    trees.assign(n, 0);
    fire.assign(n, FireState::None);
    fire_age.assign(n, 0);
    wet.assign(n, 0);
    elevation.assign(n, 0.5F);
    moisture.assign(n, 0.5F);
    wind_x.assign(n, 0.0F);
    wind_y.assign(n, 0.0F);
    civilians.assign(n, 0);
    flags.assign(n, 0);
    revealed.assign(n, 0);
    known_trees.assign(n, 0);
    seen_epoch.assign(n, 0);
}

std::int64_t WorldMap::total_trees() const noexcept
{
    std::int64_t sum = 0;
    for (auto t : trees) sum += t;
    return sum;
}

std::int64_t WorldMap::civilians_on_map() const noexcept
{
    std::int64_t sum = 0;
    for (auto c : civilians) sum += c;
    return sum;
}

bool WorldMap::any_active_fire() const noexcept
{
    for (auto f : fire) {
        if (is_active_fire(f)) return true;
    }
    return false;
}

void WorldMap::set_land(Cell c, LandType t)
{
    const auto i = index(c);
    land[i] = t;
    trees[i] = static_cast<std::uint8_t>(initial_trees(t));
    flags[i] &= static_cast<std::uint8_t>(~cell_flag::kCleared);
}

char ground_truth_char(const WorldMap& world, std::size_t i)
{
    switch (world.fire[i]) {
    case FireState::Ignited: return 'i';
    case FireState::Burning: return 'f';
    case FireState::Extinguishing: return 'e';
    case FireState::Extinguished: return 'x';
    case FireState::None: break;
    }
    if (world.civilians[i] > 0) return 'C';
    switch (world.land[i]) {
    case LandType::Water: return 'w';
    case LandType::Building: return 'B';
    default: return static_cast<char>('0' + world.trees[i]);
    }
}

std::string ascii_dump(const WorldMap& world)
{
    std::string out;
    out.reserve(world.size() + static_cast<std::size_t>(world.height));
    for (int y = 0; y < world.height; ++y) {
        for (int x = 0; x < world.width; ++x) {
            out.push_back(ground_truth_char(world, world.index({x, y})));
        }
        out.push_back('\n');
    }
    return out;
}

void Digest::add_bytes(std::span<const std::byte> bytes) noexcept
{
    std::size_t i = 0;
    for (; i + 8 <= bytes.size(); i += 8) {
        std::uint64_t w;
        std::memcpy(&w, bytes.data() + i, 8);
        state_ = mix64(state_ ^ w) + 0x2545f4914f6cdd1dULL;
    }
    if (i < bytes.size()) {
        std::uint64_t w = 0;
        std::memcpy(&w, bytes.data() + i, bytes.size() - i);
        state_ = mix64(state_ ^ w ^ 0xff00000000000000ULL);
    }
    length_ += bytes.size();
}

void Digest::add_u64(std::uint64_t v) noexcept
{
    state_ = mix64(state_ ^ v) + 0x2545f4914f6cdd1dULL;
    length_ += 8;
}

std::uint64_t Digest::value() const noexcept
{
    return mix64(state_ ^ length_);
}

void digest_world(Digest& d, const WorldMap& w)
{
    d.add_i64(w.width);
    d.add_i64(w.height);
    d.add_u64(w.seed);
    d.add_i64(w.step);
    const auto& t = w.tally;
    for (auto v : {t.trees_destroyed, t.trees_cut, t.trees_cut_labeled, t.agents_lost, t.civilians_initial,
                   t.civilians_lost, t.civilians_rescued, t.firefighters_arrived, t.drones_over_fire,
                   t.max_drones_over_fire}) {
        d.add_i64(v);
    }
    d.add_span(std::span<const LandType>(w.land));
    d.add_span(std::span<const std::uint8_t>(w.trees));
    d.add_span(std::span<const FireState>(w.fire));
    d.add_span(std::span<const std::uint16_t>(w.fire_age));
    d.add_span(std::span<const std::uint16_t>(w.wet));
    d.add_span(std::span<const float>(w.elevation));
    d.add_span(std::span<const float>(w.moisture));
    d.add_span(std::span<const float>(w.wind_x));
    d.add_span(std::span<const float>(w.wind_y));
    d.add_span(std::span<const std::uint16_t>(w.civilians));
    d.add_span(std::span<const std::uint8_t>(w.flags));
    d.add_span(std::span<const std::uint8_t>(w.revealed));
    d.add_span(std::span<const std::uint8_t>(w.known_trees));
}

std::uint64_t world_digest(const WorldMap& world)
{
    Digest d;
    digest_world(d, world);
    return d.value();
}

std::string hex_digest(std::uint64_t v)
{
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i) {
        s[static_cast<std::size_t>(i)] = kHex[v & 0xF];
        v >>= 4;
    }
    return s;
}

namespace {

constexpr char kSnapshotMagic[8] = {'W', 'F', 'S', 'N', 'A', 'P', '0', '1'};

template <class T>
void write_pod(std::ostream& out, const T& v)
{
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void write_vec(std::ostream& out, const std::vector<T>& v)
{
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T read_pod(std::istream& in)
{
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw std::runtime_error("snapshot truncated");
    return v;
}

template <class T>
void read_vec(std::istream& in, std::vector<T>& v)
{
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
    if (!in) throw std::runtime_error("snapshot truncated");
}

} // namespace

void save_snapshot(const WorldMap& w, std::ostream& out)
{
    out.write(kSnapshotMagic, sizeof(kSnapshotMagic));
    write_pod<std::int32_t>(out, w.width);
    write_pod<std::int32_t>(out, w.height);
    write_pod(out, w.seed);
    write_pod(out, w.step);
    write_pod(out, w.visibility_epoch);
    write_pod(out, w.tally);
    write_vec(out, w.land);
    write_vec(out, w.trees);
    write_vec(out, w.fire);
    write_vec(out, w.fire_age);
    write_vec(out, w.wet);
    write_vec(out, w.elevation);
    write_vec(out, w.moisture);
    write_vec(out, w.wind_x);
    write_vec(out, w.wind_y);
    write_vec(out, w.civilians);
    write_vec(out, w.flags);
    write_vec(out, w.revealed);
    write_vec(out, w.known_trees);
    write_vec(out, w.seen_epoch);
}

WorldMap load_snapshot(std::istream& in)
{
    char magic[sizeof(kSnapshotMagic)];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("not a world snapshot (bad magic)");
    }
    const auto width = read_pod<std::int32_t>(in);
    const auto height = read_pod<std::int32_t>(in);
    const auto seed = read_pod<std::uint64_t>(in);
    WorldMap w(width, height, seed);
    w.step = read_pod<std::int64_t>(in);
    w.visibility_epoch = read_pod<std::uint32_t>(in);
    w.tally = read_pod<Tally>(in);
    read_vec(in, w.land);
    read_vec(in, w.trees);
    read_vec(in, w.fire);
    read_vec(in, w.fire_age);
    read_vec(in, w.wet);
    read_vec(in, w.elevation);
    read_vec(in, w.moisture);
    read_vec(in, w.wind_x);
    read_vec(in, w.wind_y);
    read_vec(in, w.civilians);
    read_vec(in, w.flags);
    read_vec(in, w.revealed);
    read_vec(in, w.known_trees);
    read_vec(in, w.seen_epoch);
    return w;
}

} // namespace wildfire
