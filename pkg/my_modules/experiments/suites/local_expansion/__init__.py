# 局部展开阶数验证套件
