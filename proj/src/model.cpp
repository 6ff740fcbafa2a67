#include "maldom/model.hpp"

#include <fstream>

#include "maldom/classifiers.hpp"
#include "maldom/ensembles.hpp"
#include "maldom/serialize.hpp"

namespace maldom {

TrainedModel load_model(std::istream& in) {
    expect_tag(in, "maldom");
    long version = read_long(in, "format version");
    if (version != 1)
        throw ParseError("unsupported model format version " + std::to_string(version));
    std::istream::pos_type body = in.tellg();
    std::string tag = read_token(in, "model family");
    in.clear();
    in.seekg(body);
    if (tag == "c45") return std::make_shared<DecisionTree>(DecisionTree::load(in));
    if (tag == "knn") return std::make_shared<KnnModel>(KnnModel::load(in));
    if (tag == "bayes") return std::make_shared<NaiveBayesModel>(NaiveBayesModel::load(in));
    if (tag == "ann") return std::make_shared<MlpModel>(MlpModel::load(in));
    if (tag == "svm") return std::make_shared<SvmModel>(SvmModel::load(in));
    if (tag == "ensemble") return std::make_shared<VotedEnsemble>(VotedEnsemble::load(in));
    if (tag == "gbm") return std::make_shared<GbmModel>(GbmModel::load(in));
    throw ParseError("unknown model family '" + tag + "'");
}

TrainedModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file " + path);
    return load_model(in);
}

void save_model_file(const Model& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file " + path);
    out << "maldom 1\n";
    model.save(out);
    if (!out) throw IoError("failed while writing model file " + path);
}

}  // namespace maldom
