// phaseclf: flight-phase classification of occurrence narratives.
//
// Exit codes: 0 success, 1 runtime or data error, 2 usage or configuration error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "phaseclf/phaseclf.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string arch;
    std::string out;

    void attach(CLI::App* cmd, bool config_required = true) {
        auto* c = cmd->add_option("--config", config, "Run configuration (JSON)");
        if (config_required) c->required();
        cmd->add_option("--seed", seed, "Override train.seed (synth: synth.seed)");
        cmd->add_option("--arch", arch, "Override model.architecture")
            ->check(CLI::IsMember({"srnn", "lstm", "blstm", "cnn"}, CLI::ignore_case));
        cmd->add_option("--out", out, "Output directory (overrides paths.out_dir)");
    }

    phaseclf::Overrides overrides() const {
        phaseclf::Overrides o;
        o.seed = seed;
        if (!arch.empty()) o.architecture = phaseclf::parse_architecture(arch);
        if (!out.empty()) o.out_dir = std::filesystem::path(out);
        return o;
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Flight-phase classification of aviation occurrence narratives"};
    app.require_subcommand(1);

    CommonFlags synth_flags, prepare_flags, train_flags, eval_flags, compare_flags, grad_flags;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic occurrence corpus (<out>/corpus.csv)");
    synth_flags.attach(synth);
    auto* prepare = app.add_subcommand("prepare", "Ingest, clean, build the vocabulary and encode the corpus");
    prepare_flags.attach(prepare);
    auto* train = app.add_subcommand("train", "Split the corpus and train one architecture");
    train_flags.attach(train);
    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained model on its test split");
    eval_flags.attach(evaluate);
    std::string eval_model;
    evaluate->add_option("--model", eval_model, "Model file (default <out>/model.phclf)");
    auto* compare = app.add_subcommand("compare", "Train and evaluate all four architectures");
    compare_flags.attach(compare);
    auto* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check at toy dimensions");
    grad_flags.attach(gradcheck, false);

    auto* predict = app.add_subcommand("predict", "Classify ad-hoc narratives");
    std::string predict_model, predict_vocab;
    std::vector<std::string> texts;
    predict->add_option("--model", predict_model, "Model file")->required();
    predict->add_option("--vocab", predict_vocab, "Vocabulary file (default: vocab.txt next to the model)");
    predict->add_option("text", texts, "Narrative text(s)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        const auto load = [](const CommonFlags& f) { return phaseclf::load_config(f.config); };
        if (*synth) return phaseclf::cmd_synth(load(synth_flags), synth_flags.overrides(), std::cout);
        if (*prepare) return phaseclf::cmd_prepare(load(prepare_flags), prepare_flags.overrides(), std::cout);
        if (*train) return phaseclf::cmd_train(load(train_flags), train_flags.overrides(), std::cout, &std::cerr);
        if (*evaluate) {
            auto config = load(eval_flags);
            auto o = eval_flags.overrides();
            phaseclf::apply_overrides(config, o);
            const auto model = eval_model.empty() ? phaseclf::output_dir(config, o) / phaseclf::files::model
                                                  : std::filesystem::path(eval_model);
            return phaseclf::cmd_evaluate(config, o, model, std::cout);
        }
        if (*compare) return phaseclf::cmd_compare(load(compare_flags), compare_flags.overrides(), std::cout, &std::cerr);
        if (*gradcheck) {
            std::uint64_t seed = 7;
            if (!grad_flags.config.empty()) seed = load(grad_flags).train.seed;
            if (grad_flags.seed) seed = *grad_flags.seed;
            return phaseclf::cmd_gradcheck(seed, std::cout);
        }
        if (*predict) {
            for (const auto& t : texts)
                if (phaseclf::detail::trim(t).empty()) {
                    std::cerr << "error: predict needs non-empty narrative text\n";
                    return kExitUsage;
                }
            const std::filesystem::path model(predict_model);
            const auto vocab = predict_vocab.empty() ? model.parent_path() / phaseclf::files::vocab
                                                     : std::filesystem::path(predict_vocab);
            return phaseclf::cmd_predict(model, vocab, texts, std::cout);
        }
    } catch (const phaseclf::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
