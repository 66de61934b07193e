// Inception-v3 without the auxiliary classifier. Runs at 224x224 (the final
// grid is 5x5 instead of 8x8).

#include "nets.hpp"

namespace dermabench::modelzoo::nets {

namespace {

using torch::ExpandingArray;

ExpandingArray<2> pair(int64_t a, int64_t b) { return ExpandingArray<2>({a, b}); }

class BasicConvImpl : public torch::nn::Module {
 public:
  BasicConvImpl(int64_t in, int64_t out, ExpandingArray<2> kernel,
                ExpandingArray<2> stride = 1, ExpandingArray<2> padding = 0)
      : conv_(register_module("conv", conv(in, out, kernel, stride, padding))),
        bn_(register_module("bn", batch_norm(out, 1e-3))) {}

  torch::Tensor forward(torch::Tensor x) { return torch::relu(bn_(conv_(x))); }

 private:
  torch::nn::Conv2d conv_;
  torch::nn::BatchNorm2d bn_;
};
TORCH_MODULE(BasicConv);

torch::Tensor pool3x3_same(const torch::Tensor& x) {
  return torch::avg_pool2d(x, 3, 1, 1);
}

class InceptionAImpl : public torch::nn::Module {
 public:
  InceptionAImpl(int64_t in, int64_t pool_features)
      : b1x1_(register_module("branch1x1", BasicConv(in, 64, 1))),
        b5x5_1_(register_module("branch5x5_1", BasicConv(in, 48, 1))),
        b5x5_2_(register_module("branch5x5_2", BasicConv(48, 64, 5, 1, 2))),
        b3dbl_1_(register_module("branch3x3dbl_1", BasicConv(in, 64, 1))),
        b3dbl_2_(register_module("branch3x3dbl_2", BasicConv(64, 96, 3, 1, 1))),
        b3dbl_3_(register_module("branch3x3dbl_3", BasicConv(96, 96, 3, 1, 1))),
        pool_(register_module("branch_pool", BasicConv(in, pool_features, 1))) {}

  torch::Tensor forward(torch::Tensor x) {
    return torch::cat({b1x1_(x), b5x5_2_(b5x5_1_(x)), b3dbl_3_(b3dbl_2_(b3dbl_1_(x))),
                       pool_(pool3x3_same(x))},
                      1);
  }

 private:
  BasicConv b1x1_, b5x5_1_, b5x5_2_, b3dbl_1_, b3dbl_2_, b3dbl_3_, pool_;
};
TORCH_MODULE(InceptionA);

class InceptionBImpl : public torch::nn::Module {
 public:
  explicit InceptionBImpl(int64_t in)
      : b3x3_(register_module("branch3x3", BasicConv(in, 384, 3, 2))),
        b3dbl_1_(register_module("branch3x3dbl_1", BasicConv(in, 64, 1))),
        b3dbl_2_(register_module("branch3x3dbl_2", BasicConv(64, 96, 3, 1, 1))),
        b3dbl_3_(register_module("branch3x3dbl_3", BasicConv(96, 96, 3, 2))) {}

  torch::Tensor forward(torch::Tensor x) {
    return torch::cat(
        {b3x3_(x), b3dbl_3_(b3dbl_2_(b3dbl_1_(x))), torch::max_pool2d(x, 3, 2)}, 1);
  }

 private:
  BasicConv b3x3_, b3dbl_1_, b3dbl_2_, b3dbl_3_;
};
TORCH_MODULE(InceptionB);

class InceptionCImpl : public torch::nn::Module {
 public:
  InceptionCImpl(int64_t in, int64_t c7)
      : b1x1_(register_module("branch1x1", BasicConv(in, 192, 1))),
        b7_1_(register_module("branch7x7_1", BasicConv(in, c7, 1))),
        b7_2_(register_module("branch7x7_2", BasicConv(c7, c7, pair(1, 7), 1, pair(0, 3)))),
        b7_3_(register_module("branch7x7_3", BasicConv(c7, 192, pair(7, 1), 1, pair(3, 0)))),
        b7dbl_1_(register_module("branch7x7dbl_1", BasicConv(in, c7, 1))),
        b7dbl_2_(register_module("branch7x7dbl_2", BasicConv(c7, c7, pair(7, 1), 1, pair(3, 0)))),
        b7dbl_3_(register_module("branch7x7dbl_3", BasicConv(c7, c7, pair(1, 7), 1, pair(0, 3)))),
        b7dbl_4_(register_module("branch7x7dbl_4", BasicConv(c7, c7, pair(7, 1), 1, pair(3, 0)))),
        b7dbl_5_(register_module("branch7x7dbl_5", BasicConv(c7, 192, pair(1, 7), 1, pair(0, 3)))),
        pool_(register_module("branch_pool", BasicConv(in, 192, 1))) {}

  torch::Tensor forward(torch::Tensor x) {
    torch::Tensor b7 = b7_3_(b7_2_(b7_1_(x)));
    torch::Tensor b7dbl = b7dbl_5_(b7dbl_4_(b7dbl_3_(b7dbl_2_(b7dbl_1_(x)))));
    return torch::cat({b1x1_(x), b7, b7dbl, pool_(pool3x3_same(x))}, 1);
  }

 private:
  BasicConv b1x1_, b7_1_, b7_2_, b7_3_, b7dbl_1_, b7dbl_2_, b7dbl_3_, b7dbl_4_, b7dbl_5_,
      pool_;
};
TORCH_MODULE(InceptionC);

class InceptionDImpl : public torch::nn::Module {
 public:
  explicit InceptionDImpl(int64_t in)
      : b3_1_(register_module("branch3x3_1", BasicConv(in, 192, 1))),
        b3_2_(register_module("branch3x3_2", BasicConv(192, 320, 3, 2))),
        b7_1_(register_module("branch7x7x3_1", BasicConv(in, 192, 1))),
        b7_2_(register_module("branch7x7x3_2", BasicConv(192, 192, pair(1, 7), 1, pair(0, 3)))),
        b7_3_(register_module("branch7x7x3_3", BasicConv(192, 192, pair(7, 1), 1, pair(3, 0)))),
        b7_4_(register_module("branch7x7x3_4", BasicConv(192, 192, 3, 2))) {}

  torch::Tensor forward(torch::Tensor x) {
    return torch::cat({b3_2_(b3_1_(x)), b7_4_(b7_3_(b7_2_(b7_1_(x)))),
                       torch::max_pool2d(x, 3, 2)},
                      1);
  }

 private:
  BasicConv b3_1_, b3_2_, b7_1_, b7_2_, b7_3_, b7_4_;
};
TORCH_MODULE(InceptionD);

class InceptionEImpl : public torch::nn::Module {
 public:
  explicit InceptionEImpl(int64_t in)
      : b1x1_(register_module("branch1x1", BasicConv(in, 320, 1))),
        b3_1_(register_module("branch3x3_1", BasicConv(in, 384, 1))),
        b3_2a_(register_module("branch3x3_2a", BasicConv(384, 384, pair(1, 3), 1, pair(0, 1)))),
        b3_2b_(register_module("branch3x3_2b", BasicConv(384, 384, pair(3, 1), 1, pair(1, 0)))),
        b3dbl_1_(register_module("branch3x3dbl_1", BasicConv(in, 448, 1))),
        b3dbl_2_(register_module("branch3x3dbl_2", BasicConv(448, 384, 3, 1, 1))),
        b3dbl_3a_(register_module("branch3x3dbl_3a", BasicConv(384, 384, pair(1, 3), 1, pair(0, 1)))),
        b3dbl_3b_(register_module("branch3x3dbl_3b", BasicConv(384, 384, pair(3, 1), 1, pair(1, 0)))),
        pool_(register_module("branch_pool", BasicConv(in, 192, 1))) {}

  torch::Tensor forward(torch::Tensor x) {
    torch::Tensor b3 = b3_1_(x);
    b3 = torch::cat({b3_2a_(b3), b3_2b_(b3)}, 1);
    torch::Tensor b3dbl = b3dbl_2_(b3dbl_1_(x));
    b3dbl = torch::cat({b3dbl_3a_(b3dbl), b3dbl_3b_(b3dbl)}, 1);
    return torch::cat({b1x1_(x), b3, b3dbl, pool_(pool3x3_same(x))}, 1);
  }

 private:
  BasicConv b1x1_, b3_1_, b3_2a_, b3_2b_, b3dbl_1_, b3dbl_2_, b3dbl_3a_, b3dbl_3b_, pool_;
};
TORCH_MODULE(InceptionE);

class InceptionV3 final : public BackboneNet {
 public:
  InceptionV3()
      : c1a_(register_module("Conv2d_1a_3x3", BasicConv(3, 32, 3, 2))),
        c2a_(register_module("Conv2d_2a_3x3", BasicConv(32, 32, 3))),
        c2b_(register_module("Conv2d_2b_3x3", BasicConv(32, 64, 3, 1, 1))),
        c3b_(register_module("Conv2d_3b_1x1", BasicConv(64, 80, 1))),
        c4a_(register_module("Conv2d_4a_3x3", BasicConv(80, 192, 3))),
        m5b_(register_module("Mixed_5b", InceptionA(192, 32))),
        m5c_(register_module("Mixed_5c", InceptionA(256, 64))),
        m5d_(register_module("Mixed_5d", InceptionA(288, 64))),
        m6a_(register_module("Mixed_6a", InceptionB(288))),
        m6b_(register_module("Mixed_6b", InceptionC(768, 128))),
        m6c_(register_module("Mixed_6c", InceptionC(768, 160))),
        m6d_(register_module("Mixed_6d", InceptionC(768, 160))),
        m6e_(register_module("Mixed_6e", InceptionC(768, 192))),
        m7a_(register_module("Mixed_7a", InceptionD(768))),
        m7b_(register_module("Mixed_7b", InceptionE(1280))),
        m7c_(register_module("Mixed_7c", InceptionE(2048))) {}

  torch::Tensor forward(torch::Tensor x) override {
    x = c2b_(c2a_(c1a_(x)));
    x = torch::max_pool2d(x, 3, 2);
    x = c4a_(c3b_(x));
    x = torch::max_pool2d(x, 3, 2);
    x = m5d_(m5c_(m5b_(x)));
    x = m6e_(m6d_(m6c_(m6b_(m6a_(x)))));
    return m7c_(m7b_(m7a_(x)));
  }

  int64_t feature_channels() const override { return 2048; }

 private:
  BasicConv c1a_, c2a_, c2b_, c3b_, c4a_;
  InceptionA m5b_, m5c_, m5d_;
  InceptionB m6a_;
  InceptionC m6b_, m6c_, m6d_, m6e_;
  InceptionD m7a_;
  InceptionE m7b_, m7c_;
};

}  // namespace

std::shared_ptr<BackboneNet> make_inception_v3() { return std::make_shared<InceptionV3>(); }

}  // namespace dermabench::modelzoo::nets
