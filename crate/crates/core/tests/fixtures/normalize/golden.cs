soft hyphen
2 000 tab here
3 500,5 ! ［x］  nbsp 
don't crhere: "fin" , "Anführungszeichen"
"einfach" 'tick'
tab here • words Oui; words "x..." y "guillemets"
50% more - 『双』 word,"quoted" "acute"
3 500,5 it's bidi mark ' "; word,"quoted"
10 cm 1 2 crhere 50% - 20 ºC ″
é "end". 'tick' Note: ″ zero width " double " ,
 (全角) (全角) 
 nbsp  <y> tab here crhere -
"acute" "x..." y "acute" " double " (open) [括号] ..."<tag;
『双』 tab here
and . 'tick' 20 ºC
'tick' Quoi ? l'homme ..."<tag ..."<tag
<y> more
é crhere "Anführungszeichen"
% ...
<y>
 (parenthesis) don't - tab here it's - 
;
<y> "x..." y . 1 2 - it's words
3 500,5 · 20 ºC 『双』 ' (open), n° 5
『双』  nbsp  ·
. ″ l'homme . 012
″ " espacés " ［x］ - 『双』 〜 - 
•
′ Hello ! n° 5
［x］ zero width word,"quoted" Oui; "guillemets" l'homme '
『双』 n° 5 <y>
 (parenthesis) % [括号]
text "quoted", 3 500,5
"书名" plain
, Oui; don't bidi mark
l'homme "书名" n° 5 word,"quoted" " tex " 〜
text word,"quoted" "书名" 012 Quoi ? (open) "acute"
don't double spaces it's;
"书名" zero width
″ . "acute" ′ "书名"
é and €5 "end". " espacés " "Anführungszeichen"
Oui; 012
［x］ n° 5 €5 and more don't don't
50%: more
l'homme and
Note: "einfach" 3 500,5 Hello ! ..."<tag Oui; plain
"quoted", " tex " 3 500,5% tab here
; "fin" zero width
tab here and bidi mark
it's - "x..." y 〜 word,"quoted" "fin"
