#include "roaddbn/dbn.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "roaddbn/checkpoint.hpp"
#include "roaddbn/errors.hpp"
#include "roaddbn/random.hpp"

namespace roaddbn {

OutputHead OutputHead::zeros(Index inputs, int angle_bins) {
  if (inputs <= 0 || angle_bins < 1) throw ArgumentError("head needs inputs and angle bins");
  return OutputHead{Matrix::Zero(inputs, 2 + angle_bins), Vector::Zero(2 + angle_bins), angle_bins};
}

// ------------------------------------------------------------ StructureEvent

namespace {

const char* kind_name(StructureEventKind kind) {
  switch (kind) {
    case StructureEventKind::Generation: return "gen";
    case StructureEventKind::Annihilation: return "ann";
    case StructureEventKind::Layer: return "layer";
  }
  return "?";
}

}  // namespace

std::string StructureEvent::to_line() const {
  std::ostringstream out;
  out << "epoch=" << epoch << " event=" << kind_name(kind) << " j=";
  if (neuron < 0) {
    out << '-';
  } else {
    out << neuron;
  }
  out << " J=" << hidden << " L=" << layers;
  return out.str();
}

StructureEvent StructureEvent::parse(const std::string& line, int line_number) {
  std::istringstream in(line);
  std::vector<std::string> fields;
  for (std::string field; in >> field;) fields.push_back(field);
  const char* keys[] = {"epoch=", "event=", "j=", "J=", "L="};
  if (fields.size() != 5) throw ParseError("structure event needs 5 fields", line_number);
  std::string values[5];
  for (int k = 0; k < 5; ++k) {
    if (fields[k].rfind(keys[k], 0) != 0) {
      throw ParseError(std::string("expected field '") + keys[k] + "'", line_number);
    }
    values[k] = fields[k].substr(std::char_traits<char>::length(keys[k]));
  }
  auto to_int = [&](const std::string& text) {
    try {
      std::size_t used = 0;
      const long value = std::stol(text, &used);
      if (used != text.size()) throw std::invalid_argument(text);
      return value;
    } catch (const std::exception&) {
      throw ParseError("invalid integer '" + text + "'", line_number);
    }
  };

  StructureEvent event;
  event.epoch = static_cast<int>(to_int(values[0]));
  if (values[1] == "gen") {
    event.kind = StructureEventKind::Generation;
  } else if (values[1] == "ann") {
    event.kind = StructureEventKind::Annihilation;
  } else if (values[1] == "layer") {
    event.kind = StructureEventKind::Layer;
  } else {
    throw ParseError("unknown event '" + values[1] + "'", line_number);
  }
  event.neuron = values[2] == "-" ? -1 : to_int(values[2]);
  event.hidden = to_int(values[3]);
  event.layers = static_cast<int>(to_int(values[4]));
  return event;
}

// ------------------------------------------------------------------ DbnStack

std::vector<Index> DbnStack::shape() const {
  std::vector<Index> sizes;
  if (rbms.empty()) return sizes;
  sizes.push_back(input_dim());
  for (const auto& rbm : rbms) sizes.push_back(rbm.hidden());
  if (!head.empty()) sizes.push_back(head.outputs());
  return sizes;
}

void DbnStack::validate() const {
  if (rbms.empty()) throw StructuralError("a DBN stack needs at least one RBM");
  for (std::size_t l = 0; l < rbms.size(); ++l) {
    rbms[l].validate();
    if (l > 0 && rbms[l].visible() != rbms[l - 1].hidden()) {
      throw StructuralError("layer " + std::to_string(l) + " input " +
                            std::to_string(rbms[l].visible()) + " does not chain onto " +
                            std::to_string(rbms[l - 1].hidden()));
    }
  }
  if (!head.empty() && (head.weights.rows() != top_dim() || head.weights.cols() != head.outputs() ||
                        head.bias.size() != head.outputs())) {
    throw StructuralError("output head does not match the top layer");
  }
}

DbnStack DbnStack::single(RbmParams rbm) {
  DbnStack stack;
  stack.rbms.push_back(std::move(rbm));
  stack.validate();
  return stack;
}

Matrix MatrixSource::rows(std::span<const Index> indices) const {
  Matrix out(static_cast<Index>(indices.size()), samples_.cols());
  for (std::size_t n = 0; n < indices.size(); ++n) out.row(static_cast<Index>(n)) = samples_.row(indices[n]);
  return out;
}

// ------------------------------------------------------------ forward & layers

bool check_layer_generation(const DbnStack& stack, const WdTrace& trace, const TrainBatch& batch,
                            const StructureThresholds& thresholds) {
  if (stack.layers() >= thresholds.max_layers) return false;
  const RbmParams& top = stack.rbms.back();
  if (trace.size() != top.hidden()) throw StructuralError("WD trace does not match the top layer");
  if (!(trace.total() > thresholds.layer_wd_for(top.hidden()))) return false;
  return mean_energy(top, batch) > thresholds.layer_energy;
}

DbnStack push_layer(const DbnStack& stack, Index hidden, std::uint64_t seed) {
  stack.validate();
  if (hidden <= 0) throw ArgumentError("new layer needs a positive width");
  DbnStack next = stack;
  next.rbms.push_back(RbmParams::initialized(stack.top_dim(), hidden, seed));
  next.head = OutputHead{};
  next.head_epochs = 0;
  next.optimizer = {};
  return next;
}

std::vector<Vector> dbn_forward(const DbnStack& stack, const Vector& input) {
  stack.validate();
  if (input.size() != stack.input_dim()) throw StructuralError("input size does not match the stack");
  if (input.size() > 0 && (input.minCoeff() < 0.0 || input.maxCoeff() > 1.0)) {
    throw ArgumentError("DBN input must lie in [0, 1]");
  }
  std::vector<Vector> layers{input};
  for (const auto& rbm : stack.rbms) {
    layers.push_back(sigmoid(Vector(rbm.c + rbm.W.transpose() * layers.back())));
  }
  return layers;
}

std::vector<Matrix> dbn_forward_rows(const DbnStack& stack, const Matrix& input_rows) {
  std::vector<Matrix> layers{input_rows};
  for (const auto& rbm : stack.rbms) layers.push_back(hidden_probabilities(rbm, layers.back()));
  return layers;
}

Matrix dbn_top(const DbnStack& stack, const Matrix& input_rows) {
  Matrix x = input_rows;
  for (const auto& rbm : stack.rbms) x = hidden_probabilities(rbm, x);
  return x;
}

// ------------------------------------------------------------------ pretrain

void PretrainSchedule::validate() const {
  if (initial_hidden < 1 || new_layer_hidden < 1) throw ConfigError("hidden sizes must be >= 1");
  if (epochs_per_layer < 1) throw ConfigError("epochs per layer must be >= 1");
  if (batch_size < 1 || probe_size < 1) throw ConfigError("batch and probe sizes must be >= 1");
  if (cd.k < 1 || !(cd.learning_rate > 0.0)) throw ConfigError("CD needs k >= 1 and lr > 0");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
}

namespace {

Matrix feed_lower_layers(const DbnStack& stack, Matrix x) {
  for (std::size_t l = 0; l + 1 < stack.rbms.size(); ++l) x = hidden_probabilities(stack.rbms[l], x);
  return x;
}

std::vector<Index> shuffled_indices(Index count, std::uint64_t seed) {
  std::vector<Index> order(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  return order;
}

}  // namespace

DbnStack pretrain_adaptive(const SampleSource& data, const StructureThresholds& thresholds,
                           const PretrainSchedule& schedule,
                           const std::function<void(const EpochReport&)>& on_epoch) {
  if (data.size() == 0) throw ArgumentError("pretraining needs a non-empty data stream");
  thresholds.validate();
  schedule.validate();

  const Index count = data.size();
  const Index probe_count = std::min(count, schedule.probe_size);
  std::vector<Index> probe_rows(static_cast<std::size_t>(probe_count));
  for (Index k = 0; k < probe_count; ++k) probe_rows[static_cast<std::size_t>(k)] = k * count / probe_count;
  const Matrix probe_input = data.rows(probe_rows);

  const Index first_hidden = std::min(schedule.initial_hidden, thresholds.max_hidden);
  DbnStack stack = DbnStack::single(
      RbmParams::initialized(data.dim(), first_hidden, mix_seed(schedule.seed, 0)));

  int epoch = 0;
  std::uint64_t stream = 1;
  while (true) {
    WdTrace trace = WdTrace::zeros(stack.top_dim(), schedule.gamma);
    for (int e = 0; e < schedule.epochs_per_layer; ++e) {
      ++epoch;
      const RbmParams before = stack.rbms.back();
      const auto order = shuffled_indices(count, mix_seed(schedule.seed, stream++));
      for (Index start = 0; start < count; start += schedule.batch_size) {
        const Index stop = std::min(count, start + schedule.batch_size);
        const std::span<const Index> rows(order.data() + start, static_cast<std::size_t>(stop - start));
        const TrainBatch batch(feed_lower_layers(stack, data.rows(rows)));
        stack.rbms.back() = cd_update(stack.rbms.back(), batch, schedule.cd,
                                      mix_seed(schedule.seed, stream++));
      }
      trace = update_wd(trace, before, stack.rbms.back());

      for (Index j : check_generation(trace, thresholds)) {
        auto [params, grown] = generate_neuron(stack.rbms.back(), trace, j,
                                               mix_seed(schedule.seed, stream++), thresholds.max_hidden);
        stack.rbms.back() = std::move(params);
        trace = std::move(grown);
        stack.log.push_back({epoch, StructureEventKind::Generation, j, stack.top_dim(), stack.layers()});
      }

      const TrainBatch probe(feed_lower_layers(stack, probe_input));
      auto doomed = check_annihilation(stack.rbms.back(), probe, thresholds);
      std::sort(doomed.rbegin(), doomed.rend());
      for (Index j : doomed) {
        auto [params, shrunk] = annihilate_neuron(stack.rbms.back(), trace, j);
        stack.rbms.back() = std::move(params);
        trace = std::move(shrunk);
        stack.log.push_back({epoch, StructureEventKind::Annihilation, j, stack.top_dim(), stack.layers()});
      }
      stack.validate();

      if (on_epoch) {
        on_epoch(EpochReport{epoch, stack.layers(), stack.top_dim(),
                             reconstruction_error(stack.rbms.back(), probe), trace.total()});
      }
    }

    const TrainBatch probe(feed_lower_layers(stack, probe_input));
    if (!check_layer_generation(stack, trace, probe, thresholds)) break;
    const Index hidden = std::min(schedule.new_layer_hidden, thresholds.max_hidden);
    stack = push_layer(stack, hidden, mix_seed(schedule.seed, stream++));
    stack.log.push_back({epoch, StructureEventKind::Layer, -1, hidden, stack.layers()});
  }
  return stack;
}

std::vector<Index> replay_structure(Index input_dim, Index initial_hidden,
                                    const std::vector<StructureEvent>& log) {
  std::vector<Index> sizes{input_dim, initial_hidden};
  for (const auto& event : log) {
    switch (event.kind) {
      case StructureEventKind::Generation: ++sizes.back(); break;
      case StructureEventKind::Annihilation:
        if (sizes.back() < 2) throw StructuralError("replayed annihilation empties a layer");
        --sizes.back();
        break;
      case StructureEventKind::Layer: sizes.push_back(event.hidden); break;
    }
    if (sizes.back() != event.hidden || static_cast<int>(sizes.size()) - 1 != event.layers) {
      throw StructuralError("structure log disagrees with replay at epoch " + std::to_string(event.epoch));
    }
  }
  return sizes;
}

void write_structure_log(std::ostream& out, const std::vector<StructureEvent>& log) {
  for (const auto& event : log) out << event.to_line() << '\n';
}

std::vector<StructureEvent> read_structure_log(std::istream& in) {
  std::vector<StructureEvent> log;
  int line_number = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    log.push_back(StructureEvent::parse(line, line_number));
  }
  return log;
}

// ---------------------------------------------------------------- checkpoints

void write_stack(std::ostream& out, const DbnStack& stack) {
  stack.validate();
  out << "DBNSTACK 1\nlayers " << stack.layers() << '\n';
  for (const auto& rbm : stack.rbms) write_rbm(out, rbm);
  if (stack.head.empty()) {
    out << "head none\n";
  } else {
    out << "head " << stack.head.angle_bins << '\n';
    detail::write_vector(out, "hb", stack.head.bias);
    for (Index i = 0; i < stack.head.weights.rows(); ++i) {
      detail::write_vector(out, "hw", stack.head.weights.row(i).transpose());
    }
  }
  out << "head_epochs " << stack.head_epochs << '\n';
  out << "events " << stack.log.size() << '\n';
  write_structure_log(out, stack.log);
  const OptimizerState& opt = stack.optimizer;
  out << "optimizer " << opt.steps << ' ' << opt.first.size() << '\n';
  for (std::size_t slot = 0; slot < opt.first.size(); ++slot) {
    out << "slot " << opt.first[slot].rows() << ' ' << opt.first[slot].cols() << '\n';
    for (Index i = 0; i < opt.first[slot].rows(); ++i) detail::write_vector(out, "m", opt.first[slot].row(i).transpose());
    for (Index i = 0; i < opt.second[slot].rows(); ++i) detail::write_vector(out, "s", opt.second[slot].row(i).transpose());
  }
}

DbnStack read_stack(std::istream& in) {
  detail::LineReader reader(in);
  auto tokens = reader.next("DBNSTACK header");
  if (tokens.size() != 2 || tokens[0] != "DBNSTACK" || tokens[1] != "1") reader.fail("expected 'DBNSTACK 1'");
  tokens = reader.next("layer count");
  if (tokens.size() != 2 || tokens[0] != "layers") reader.fail("expected 'layers <L>'");
  const long layers = detail::parse_integer(tokens[1], reader);
  if (layers < 1) reader.fail("a stack needs at least one layer");

  DbnStack stack;
  for (long l = 0; l < layers; ++l) stack.rbms.push_back(detail::read_rbm_block(reader));

  tokens = reader.next("head record");
  if (tokens.size() != 2 || tokens[0] != "head") reader.fail("expected 'head <a|none>'");
  if (tokens[1] != "none") {
    const long bins = detail::parse_integer(tokens[1], reader);
    if (bins < 1) reader.fail("head needs at least one angle bin");
    stack.head.angle_bins = static_cast<int>(bins);
    stack.head.bias = detail::read_vector(reader, "hb", stack.head.outputs());
    stack.head.weights.resize(stack.top_dim(), stack.head.outputs());
    for (Index i = 0; i < stack.top_dim(); ++i) {
      stack.head.weights.row(i) = detail::read_vector(reader, "hw", stack.head.outputs()).transpose();
    }
  }

  tokens = reader.next("head_epochs");
  if (tokens.size() != 2 || tokens[0] != "head_epochs") reader.fail("expected 'head_epochs <n>'");
  stack.head_epochs = static_cast<int>(detail::parse_integer(tokens[1], reader));

  tokens = reader.next("event count");
  if (tokens.size() != 2 || tokens[0] != "events") reader.fail("expected 'events <n>'");
  const long events = detail::parse_integer(tokens[1], reader);
  for (long e = 0; e < events; ++e) {
    const auto fields = reader.next("structure event");
    std::string line;
    for (const auto& field : fields) line += field + ' ';
    stack.log.push_back(StructureEvent::parse(line, reader.line()));
  }

  tokens = reader.next("optimizer record");
  if (tokens.size() != 3 || tokens[0] != "optimizer") reader.fail("expected 'optimizer <steps> <slots>'");
  stack.optimizer.steps = detail::parse_integer(tokens[1], reader);
  const long slots = detail::parse_integer(tokens[2], reader);
  if (stack.optimizer.steps < 0 || slots < 0) reader.fail("optimizer counts must be non-negative");
  for (long slot = 0; slot < slots; ++slot) {
    tokens = reader.next("optimizer slot");
    if (tokens.size() != 3 || tokens[0] != "slot") reader.fail("expected 'slot <rows> <cols>'");
    const long rows = detail::parse_integer(tokens[1], reader);
    const long cols = detail::parse_integer(tokens[2], reader);
    if (rows < 0 || cols < 0) reader.fail("slot dimensions must be non-negative");
    Matrix first(rows, cols);
    Matrix second(rows, cols);
    for (Index i = 0; i < rows; ++i) first.row(i) = detail::read_vector(reader, "m", cols).transpose();
    for (Index i = 0; i < rows; ++i) second.row(i) = detail::read_vector(reader, "s", cols).transpose();
    stack.optimizer.first.push_back(std::move(first));
    stack.optimizer.second.push_back(std::move(second));
  }
  try {
    stack.validate();
  } catch (const StructuralError& error) {
    reader.fail(error.what());
  }
  return stack;
}

void save_stack(const std::string& path, const DbnStack& stack) {
  std::ofstream out(path);
  if (!out) throw FileError("cannot open '" + path + "' for writing");
  write_stack(out, stack);
  if (!out) throw FileError("write to '" + path + "' failed");
}

DbnStack load_stack(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FileError("cannot open '" + path + "'");
  return read_stack(in);
}

std::string describe_shape(const std::vector<Index>& sizes) {
  std::string out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (i > 0) out += sizes.size() == 2 ? " and " : (i + 1 == sizes.size() ? ", and " : ", ");
    out += std::to_string(sizes[i]);
  }
  return out + " neurons";
}

}  // namespace roaddbn
