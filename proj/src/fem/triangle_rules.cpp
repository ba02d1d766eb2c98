// Xiao-Gimbutas fully symmetric triangle rules on the reference triangle
// (0,0), (1,0), (0,1), degrees 1 through 9. Weights sum to 1/2.

#include "triangle_rules.hpp"

namespace crossvec::fem::detail {

namespace {
constexpr TrianglePoint kDegree1[] = {
    {0.3333333333333333, 0.3333333333333333, 0.5},
};

constexpr TrianglePoint kDegree2[] = {
    {0.16666666666666666, 0.16666666666666666, 0.16666666666666666},
    {0.16666666666666666, 0.6666666666666667, 0.16666666666666666},
    {0.6666666666666667, 0.16666666666666666, 0.16666666666666666},
};

constexpr TrianglePoint kDegree3[] = {
    {0.4459484909159649, 0.4459484909159649, 0.11169079483900574},
    {0.09157621350977085, 0.09157621350977085, 0.05497587182766094},
    {0.4459484909159649, 0.10810301816807022, 0.11169079483900574},
    {0.09157621350977085, 0.8168475729804583, 0.05497587182766094},
    {0.10810301816807022, 0.4459484909159649, 0.11169079483900574},
    {0.8168475729804583, 0.09157621350977085, 0.05497587182766094},
};

constexpr TrianglePoint kDegree4[] = {
    {0.4459484909159649, 0.4459484909159649, 0.11169079483900574},
    {0.09157621350977085, 0.09157621350977085, 0.05497587182766094},
    {0.4459484909159649, 0.10810301816807022, 0.11169079483900574},
    {0.09157621350977085, 0.8168475729804583, 0.05497587182766094},
    {0.10810301816807022, 0.4459484909159649, 0.11169079483900574},
    {0.8168475729804583, 0.09157621350977085, 0.05497587182766094},
};

constexpr TrianglePoint kDegree5[] = {
    {0.3333333333333333, 0.3333333333333333, 0.1125},
    {0.1012865073234564, 0.1012865073234564, 0.06296959027241357},
    {0.47014206410511505, 0.47014206410511505, 0.0661970763942531},
    {0.1012865073234564, 0.7974269853530872, 0.06296959027241357},
    {0.47014206410511505, 0.05971587178976989, 0.0661970763942531},
    {0.7974269853530872, 0.1012865073234564, 0.06296959027241357},
    {0.05971587178976989, 0.47014206410511505, 0.0661970763942531},
};

constexpr TrianglePoint kDegree6[] = {
    {0.21942998254978302, 0.21942998254978302, 0.08566656207649052},
    {0.48013796411221504, 0.48013796411221504, 0.04036554479651549},
    {0.21942998254978302, 0.561140034900434, 0.08566656207649052},
    {0.48013796411221504, 0.039724071775569914, 0.04036554479651549},
    {0.561140034900434, 0.21942998254978302, 0.08566656207649052},
    {0.039724071775569914, 0.48013796411221504, 0.04036554479651549},
    {0.019371724361240805, 0.14161901592396814, 0.02031727989683033},
    {0.8390092597147911, 0.019371724361240805, 0.02031727989683033},
    {0.14161901592396814, 0.8390092597147911, 0.02031727989683033},
    {0.14161901592396814, 0.019371724361240805, 0.02031727989683033},
    {0.8390092597147911, 0.14161901592396814, 0.02031727989683033},
    {0.019371724361240805, 0.8390092597147911, 0.02031727989683033},
};

constexpr TrianglePoint kDegree7[] = {
    {0.47319565368925104, 0.47319565368925104, 0.02659041664838023},
    {0.057797640054506494, 0.057797640054506494, 0.020459085197028434},
    {0.24166360639724743, 0.24166360639724743, 0.06386262428056692},
    {0.47319565368925104, 0.05360869262149792, 0.02659041664838023},
    {0.057797640054506494, 0.884404719890987, 0.020459085197028434},
    {0.24166360639724743, 0.5166727872055051, 0.06386262428056692},
    {0.05360869262149792, 0.47319565368925104, 0.02659041664838023},
    {0.884404719890987, 0.057797640054506494, 0.020459085197028434},
    {0.5166727872055051, 0.24166360639724743, 0.06386262428056692},
    {0.046971206130085534, 0.2593390118657857, 0.027877270270345547},
    {0.6936897820041288, 0.046971206130085534, 0.027877270270345547},
    {0.2593390118657857, 0.6936897820041288, 0.027877270270345547},
    {0.2593390118657857, 0.046971206130085534, 0.027877270270345547},
    {0.6936897820041288, 0.2593390118657857, 0.027877270270345547},
    {0.046971206130085534, 0.6936897820041288, 0.027877270270345547},
};

constexpr TrianglePoint kDegree8[] = {
    {0.3333333333333333, 0.3333333333333333, 0.0721578038388936},
    {0.17056930775176027, 0.17056930775176027, 0.05160868526735912},
    {0.4592925882927231, 0.4592925882927231, 0.04754581713364232},
    {0.05054722831703107, 0.05054722831703107, 0.01622924881159904},
    {0.17056930775176027, 0.6588613844964795, 0.05160868526735912},
    {0.4592925882927231, 0.08141482341455375, 0.04754581713364232},
    {0.05054722831703107, 0.8989055433659379, 0.01622924881159904},
    {0.6588613844964795, 0.17056930775176027, 0.05160868526735912},
    {0.08141482341455375, 0.4592925882927231, 0.04754581713364232},
    {0.8989055433659379, 0.05054722831703107, 0.01622924881159904},
    {0.008394777409957675, 0.26311282963463806, 0.013615157087217498},
    {0.7284923929554044, 0.008394777409957675, 0.013615157087217498},
    {0.26311282963463806, 0.7284923929554044, 0.013615157087217498},
    {0.26311282963463806, 0.008394777409957675, 0.013615157087217498},
    {0.7284923929554044, 0.26311282963463806, 0.013615157087217498},
    {0.008394777409957675, 0.7284923929554044, 0.013615157087217498},
};

constexpr TrianglePoint kDegree9[] = {
    {0.3333333333333333, 0.3333333333333333, 0.04856789814139942},
    {0.4896825191987376, 0.4896825191987376, 0.015667350113569536},
    {0.1882035356190328, 0.1882035356190328, 0.03982386946360513},
    {0.43708959149293664, 0.43708959149293664, 0.03891377050238714},
    {0.04472951339445275, 0.04472951339445275, 0.012788837829349017},
    {0.4896825191987376, 0.02063496160252476, 0.015667350113569536},
    {0.1882035356190328, 0.6235929287619344, 0.03982386946360513},
    {0.43708959149293664, 0.12582081701412673, 0.03891377050238714},
    {0.04472951339445275, 0.9105409732110945, 0.012788837829349017},
    {0.02063496160252476, 0.4896825191987376, 0.015667350113569536},
    {0.6235929287619344, 0.1882035356190328, 0.03982386946360513},
    {0.12582081701412673, 0.43708959149293664, 0.03891377050238714},
    {0.9105409732110945, 0.04472951339445275, 0.012788837829349017},
    {0.0368384120547363, 0.2219629891607657, 0.021641769688644688},
    {0.741198598784498, 0.0368384120547363, 0.021641769688644688},
    {0.2219629891607657, 0.741198598784498, 0.021641769688644688},
    {0.2219629891607657, 0.0368384120547363, 0.021641769688644688},
    {0.741198598784498, 0.2219629891607657, 0.021641769688644688},
    {0.0368384120547363, 0.741198598784498, 0.021641769688644688},
};

} // namespace

std::span<const TrianglePoint> triangle_rule_table(int degree)
{
  switch (degree) {
  case 1: return kDegree1;
  case 2: return kDegree2;
  case 3: return kDegree3;
  case 4: return kDegree4;
  case 5: return kDegree5;
  case 6: return kDegree6;
  case 7: return kDegree7;
  case 8: return kDegree8;
  case 9: return kDegree9;
  default: return {};
  }
}

} // namespace crossvec::fem::detail
